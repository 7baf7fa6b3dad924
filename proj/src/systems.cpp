#include "nsfd/systems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "nsfd/errors.hpp"

namespace nsfd {

namespace {

constexpr double kPartialsRelTol = 1e-5;

double fd_step(double coord) {
    static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
    return base * std::max(1.0, std::abs(coord));
}

// d/dx or d/dy of one component at (x, y). Uses a second-order forward
// stencil when the central one would step below zero.
double differentiate(const ScalarField& f, double x, double y, bool along_x) {
    const double coord = along_x ? x : y;
    const double step = fd_step(coord);
    auto at = [&](double offset) {
        return along_x ? f(x + offset, y) : f(x, y + offset);
    };
    if (coord >= 0.0 && coord - step < 0.0) {
        return (-3.0 * at(0.0) + 4.0 * at(step) - at(2.0 * step)) / (2.0 * step);
    }
    return (at(step) - at(-step)) / (2.0 * step);
}

PartialValues numeric_partials_of(const Components& c, double x, double y) {
    return PartialValues{
        differentiate(c.f_plus, x, y, true),  differentiate(c.f_plus, x, y, false),
        differentiate(c.f_minus, x, y, true), differentiate(c.f_minus, x, y, false),
        differentiate(c.g_plus, x, y, true),  differentiate(c.g_plus, x, y, false),
        differentiate(c.g_minus, x, y, true), differentiate(c.g_minus, x, y, false),
    };
}

PartialValues analytic_partials_of(const ComponentPartials& p, double x, double y) {
    return PartialValues{
        p.dfp_dx(x, y), p.dfp_dy(x, y), p.dfm_dx(x, y), p.dfm_dy(x, y),
        p.dgp_dx(x, y), p.dgp_dy(x, y), p.dgm_dx(x, y), p.dgm_dy(x, y),
    };
}

std::string where(double x, double y) {
    std::ostringstream os;
    os << "(" << x << ", " << y << ")";
    return os.str();
}

void validate(const std::string& name, const Components& c,
              const std::optional<ComponentPartials>& partials, const ValidationGrid& grid) {
    if (!c.f_plus || !c.f_minus || !c.g_plus || !c.g_minus) {
        throw ConstructionError(name + ": all four components are required");
    }
    if (partials) {
        const auto& p = *partials;
        if (!p.dfp_dx || !p.dfp_dy || !p.dfm_dx || !p.dfm_dy || !p.dgp_dx || !p.dgp_dy ||
            !p.dgm_dx || !p.dgm_dy) {
            throw ConstructionError(name + ": analytic partials must be complete");
        }
    }
    if (grid.points < 2 || !(grid.extent > 0.0)) {
        throw ConstructionError(name + ": validation grid needs >= 2 points and positive extent");
    }

    const double spacing = grid.extent / (grid.points - 1);
    for (int i = 0; i < grid.points; ++i) {
        for (int j = 0; j < grid.points; ++j) {
            const double x = i * spacing;
            const double y = j * spacing;
            const bool on_axis = (i == 0 || j == 0);
            const double values[4] = {c.f_plus(x, y), c.f_minus(x, y), c.g_plus(x, y),
                                      c.g_minus(x, y)};
            for (double v : values) {
                if (!std::isfinite(v) || v < 0.0 || (!on_axis && v == 0.0)) {
                    throw ConstructionError(name + ": component not positive at " + where(x, y));
                }
            }
            if (!partials) continue;

            const auto exact = analytic_partials_of(*partials, x, y);
            const auto approx = numeric_partials_of(c, x, y);
            const double a[8] = {exact.dfp_dx, exact.dfp_dy, exact.dfm_dx, exact.dfm_dy,
                                 exact.dgp_dx, exact.dgp_dy, exact.dgm_dx, exact.dgm_dy};
            const double n[8] = {approx.dfp_dx, approx.dfp_dy, approx.dfm_dx, approx.dfm_dy,
                                 approx.dgp_dx, approx.dgp_dy, approx.dgm_dx, approx.dgm_dy};
            for (int k = 0; k < 8; ++k) {
                const double scale = std::max({1.0, std::abs(a[k]), std::abs(n[k])});
                if (!(std::abs(a[k] - n[k]) <= kPartialsRelTol * scale)) {
                    throw ConstructionError(name + ": analytic partial #" + std::to_string(k) +
                                            " disagrees with finite differences at " +
                                            where(x, y));
                }
            }
        }
    }
}

}  // namespace

SplitSystem::SplitSystem(std::string name, Components components,
                         std::optional<ComponentPartials> partials, ValidationGrid grid)
    : name_(std::move(name)), components_(std::move(components)), partials_(std::move(partials)) {
    validate(name_, components_, partials_, grid);
}

ComponentValues SplitSystem::components(double x, double y) const {
    return ComponentValues{components_.f_plus(x, y), components_.f_minus(x, y),
                           components_.g_plus(x, y), components_.g_minus(x, y)};
}

PartialValues SplitSystem::partials(double x, double y) const {
    if (partials_) return analytic_partials_of(*partials_, x, y);
    return numeric_partials_of(components_, x, y);
}

std::pair<double, double> SplitSystem::rates(double x, double y) const {
    const auto c = components(x, y);
    return {x * (c.f_plus - c.f_minus), y * (c.g_plus - c.g_minus)};
}

std::pair<double, double> vector_field(const SplitSystem& sys, const State& s) {
    if (!(s.x >= 0.0) || !(s.y >= 0.0)) {
        throw DomainError("vector_field: state " + where(s.x, s.y) + " outside positive quadrant");
    }
    return sys.rates(s.x, s.y);
}

PartialValues numeric_partials(const SplitSystem& sys, const State& s) {
    return numeric_partials_of(sys.component_functions(), s.x, s.y);
}

SplitSystem make_rosenzweig_macarthur(const ModelParams& p) {
    if (!(p.a > 0.0) || !(p.b > 0.0) || !(p.c > 0.0) || !(p.d > 0.0)) {
        throw ConstructionError("rma: parameters a, b, c, d must all be positive");
    }
    const double a = p.a, b = p.b, c = p.c, d = p.d;

    Components comps{
        [b](double, double) { return b; },
        [a, b, c](double x, double y) { return b * x + a * y / (c + x); },
        [c](double x, double) { return x / (c + x); },
        [d](double, double) { return d; },
    };
    auto zero = [](double, double) { return 0.0; };
    ComponentPartials partials{
        zero,
        zero,
        [a, b, c](double x, double y) { return b - a * y / ((c + x) * (c + x)); },
        [a, c](double x, double) { return a / (c + x); },
        [c](double x, double) { return c / ((c + x) * (c + x)); },
        zero,
        zero,
        zero,
    };

    std::ostringstream name;
    name << "rma:" << a << "," << b << "," << c << "," << d;
    return SplitSystem(name.str(), std::move(comps), std::move(partials));
}

ModelParams model1_params() { return {2.0, 1.0, 0.5, 6.0}; }
ModelParams model2_params() { return {2.0, 1.0, 1.0, 0.2}; }

SplitSystem model_from_name(std::string_view selector) {
    if (selector == "model1") return make_rosenzweig_macarthur(model1_params());
    if (selector == "model2") return make_rosenzweig_macarthur(model2_params());

    constexpr std::string_view prefix = "rma:";
    if (selector.substr(0, prefix.size()) != prefix) {
        throw std::invalid_argument("unknown model '" + std::string(selector) +
                                    "' (expected model1, model2 or rma:a,b,c,d)");
    }
    std::vector<double> values;
    std::string rest(selector.substr(prefix.size()));
    std::istringstream in(rest);
    std::string field;
    while (std::getline(in, field, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(field, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != field.size()) {
            throw std::invalid_argument("rma: cannot parse parameter '" + field + "'");
        }
        values.push_back(v);
    }
    if (values.size() != 4 || (!rest.empty() && rest.back() == ',')) {
        throw std::invalid_argument("rma: expected exactly four parameters a,b,c,d");
    }
    return make_rosenzweig_macarthur({values[0], values[1], values[2], values[3]});
}

}  // namespace nsfd
