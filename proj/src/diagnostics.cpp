#include "nsfd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nsfd/errors.hpp"

namespace nsfd {

namespace {

constexpr int kGhostSeeds = 60;
constexpr int kGhostIterations = 100;
constexpr double kFixedPointResidual = 1e-10;
constexpr double kGhostDedup = 1e-6;
constexpr double kGenuineDistance = 1e-6;
constexpr double kClassicalBoxGrowth = 1.1;

double max_norm(double dx, double dy) { return std::max(std::abs(dx), std::abs(dy)); }

long long grid_steps(double span, double h, const char* who) {
    const double ratio = span / h;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(n - ratio) > 1e-9 * std::max(1.0, ratio)) {
        std::ostringstream os;
        os << who << ": step " << h << " does not divide the horizon " << span;
        throw std::invalid_argument(os.str());
    }
    return static_cast<long long>(n);
}

struct Residual {
    double rx;
    double ry;
};

Residual map_residual(const SplitSystem& sys, const SchemeId& scheme, double h, double x, double y) {
    const State next = step(sys, scheme, State{x, y, 0.0}, h);
    return {next.x - x, next.y - y};
}

// Column of the residual Jacobian by differences that never cross an axis.
Residual residual_derivative(const SplitSystem& sys, const SchemeId& scheme, double h, double x,
                             double y, bool along_x) {
    static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
    const double coord = along_x ? x : y;
    const double d = base * std::max(1.0, std::abs(coord));
    auto at = [&](double offset) {
        return along_x ? map_residual(sys, scheme, h, x + offset, y)
                       : map_residual(sys, scheme, h, x, y + offset);
    };
    if (coord - d < 0.0) {
        const Residual r0 = at(0.0), r1 = at(d), r2 = at(2.0 * d);
        return {(-3.0 * r0.rx + 4.0 * r1.rx - r2.rx) / (2.0 * d),
                (-3.0 * r0.ry + 4.0 * r1.ry - r2.ry) / (2.0 * d)};
    }
    const Residual up = at(d), down = at(-d);
    return {(up.rx - down.rx) / (2.0 * d), (up.ry - down.ry) / (2.0 * d)};
}

// Projected Newton on map(s) - s, clamped to the closed quadrant.
std::optional<std::pair<double, double>> newton_fixed_point(const SplitSystem& sys,
                                                            const SchemeId& scheme, double h,
                                                            double x, double y) {
    try {
        for (int it = 0; it < kGhostIterations; ++it) {
            const Residual r = map_residual(sys, scheme, h, x, y);
            if (!std::isfinite(r.rx) || !std::isfinite(r.ry)) return std::nullopt;
            const double res = max_norm(r.rx, r.ry);
            if (res == 0.0) return std::pair{x, y};

            const Residual cx = residual_derivative(sys, scheme, h, x, y, true);
            const Residual cy = residual_derivative(sys, scheme, h, x, y, false);
            const double det = cx.rx * cy.ry - cy.rx * cx.ry;
            if (!std::isfinite(det) || det == 0.0) {
                return res < kFixedPointResidual ? std::optional{std::pair{x, y}} : std::nullopt;
            }
            const double dx = (cy.ry * r.rx - cy.rx * r.ry) / det;
            const double dy = (cx.rx * r.ry - cx.ry * r.rx) / det;
            const double nx = std::max(0.0, x - dx);
            const double ny = std::max(0.0, y - dy);
            const double moved = max_norm(nx - x, ny - y);
            x = nx;
            y = ny;
            if (!std::isfinite(x) || !std::isfinite(y) || std::hypot(x, y) > kDivergenceNorm) {
                return std::nullopt;
            }
            if (res < kFixedPointResidual && moved <= 1e-14 * std::max(1.0, std::hypot(x, y))) {
                break;
            }
        }
        const Residual r = map_residual(sys, scheme, h, x, y);
        if (max_norm(r.rx, r.ry) < kFixedPointResidual) return std::pair{x, y};
    } catch (const Error&) {
        // Seeds whose iterates hit a non-finite stage or leave the map's domain are dropped.
    }
    return std::nullopt;
}

}  // namespace

OrderEstimate estimate_order(const SplitSystem& sys, const SchemeId& scheme, const State& s0,
                             double t_end, const std::vector<double>& steps) {
    if (steps.size() < 4) {
        throw std::invalid_argument("estimate_order: at least four step sizes are required");
    }
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (!(steps[i] > 0.0)) throw std::invalid_argument("estimate_order: steps must be positive");
        if (i > 0 && !(steps[i] < steps[i - 1])) {
            throw std::invalid_argument("estimate_order: steps must be sorted in descending order");
        }
    }
    const double span = t_end - s0.t;
    if (!(span > 0.0)) throw std::invalid_argument("estimate_order: t_end must exceed t0");

    const double h_ref = steps.back() / 100.0;
    const long long n_ref = grid_steps(span, h_ref, "estimate_order");
    const Trajectory reference = integrate(sys, SchemeId::rk4(), s0, h_ref, t_end);
    if (reference.halt_reason || static_cast<long long>(reference.states.size()) != n_ref + 1) {
        throw ReferenceUnavailable("estimate_order: RK4 reference did not reach t_end" +
                                   (reference.halt_reason ? " (" + *reference.halt_reason + ")"
                                                          : std::string()));
    }
    for (const State& s : reference.states) {
        if (!std::isfinite(s.x) || !std::isfinite(s.y)) {
            throw ReferenceUnavailable("estimate_order: RK4 reference left the finite range");
        }
    }

    OrderEstimate out;
    out.scheme = scheme;
    out.steps = steps;
    for (double h : steps) {
        const long long n = grid_steps(span, h, "estimate_order");
        if (n_ref % n != 0) {
            throw std::invalid_argument("estimate_order: reference grid does not nest the coarse grid");
        }
        const long long stride = n_ref / n;
        const Trajectory traj = integrate(sys, scheme, s0, h, t_end);
        if (traj.halt_reason || static_cast<long long>(traj.states.size()) != n + 1) {
            std::ostringstream os;
            os << "estimate_order: " << scheme_label(scheme) << " failed at h=" << h;
            throw Error(os.str());
        }
        double sup = 0.0;
        for (long long k = 0; k <= n; ++k) {
            const State& a = traj.states[static_cast<std::size_t>(k)];
            const State& b = reference.states[static_cast<std::size_t>(k * stride)];
            sup = std::max(sup, max_norm(a.x - b.x, a.y - b.y));
        }
        if (!(sup > 0.0) || !std::isfinite(sup)) {
            std::ostringstream os;
            os << "estimate_order: error at h=" << h << " is " << sup << ", cannot take its log";
            throw Error(os.str());
        }
        out.errors.push_back(sup);
    }

    const std::size_t m = steps.size();
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mean_x += std::log(steps[i]);
        mean_y += std::log(out.errors[i]);
    }
    mean_x /= static_cast<double>(m);
    mean_y /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double dx = std::log(steps[i]) - mean_x;
        sxx += dx * dx;
        sxy += dx * (std::log(out.errors[i]) - mean_y);
    }
    out.slope = sxy / sxx;
    out.intercept = mean_y - out.slope * mean_x;
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double fit = out.intercept + out.slope * std::log(steps[i]);
        ss += (std::log(out.errors[i]) - fit) * (std::log(out.errors[i]) - fit);
    }
    out.residual = std::sqrt(ss / static_cast<double>(m));
    return out;
}

PositivityAudit audit_positivity(const Trajectory& traj) {
    PositivityAudit out;
    out.scheme = traj.scheme;
    out.h = traj.h;
    if (!traj.states.empty()) out.initial = traj.states.front();
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const State& s = traj.states[k];
        if (std::min(s.x, s.y) < 0.0) {
            out.first_violation = PositivityViolation{k, s};
            break;
        }
    }
    return out;
}

std::size_t GhostReport::ghost_count() const {
    return static_cast<std::size_t>(std::count_if(fixed_points.begin(), fixed_points.end(),
                                                  [](const MapFixedPoint& p) { return !p.genuine; }));
}

GhostReport detect_ghosts(const SplitSystem& sys, const SchemeId& scheme, double h, const Box& box) {
    if (!(h > 0.0)) throw std::invalid_argument("detect_ghosts: step size must be positive");
    if (!(box.x_max > 0.0) || !(box.y_max > 0.0)) {
        throw std::invalid_argument("detect_ghosts: box extents must be positive");
    }
    GhostReport out;
    out.scheme = scheme;
    out.h = h;
    out.search_box = box;
    if (!scheme.is_nonstandard()) {
        out.search_box.x_max *= kClassicalBoxGrowth;
        out.search_box.y_max *= kClassicalBoxGrowth;
    }
    const Box& search = out.search_box;
    const auto equilibria = find_equilibria(sys, search).points;

    for (int i = 0; i < kGhostSeeds; ++i) {
        for (int j = 0; j < kGhostSeeds; ++j) {
            const double x0 = search.x_max * i / (kGhostSeeds - 1);
            const double y0 = search.y_max * j / (kGhostSeeds - 1);
            const auto found = newton_fixed_point(sys, scheme, h, x0, y0);
            if (!found) continue;
            const auto [x, y] = *found;
            if (x > search.x_max * (1.0 + 1e-12) || y > search.y_max * (1.0 + 1e-12)) continue;
            const bool duplicate =
                std::any_of(out.fixed_points.begin(), out.fixed_points.end(), [&](const auto& p) {
                    return std::hypot(p.x - x, p.y - y) < kGhostDedup;
                });
            if (duplicate) continue;
            const bool genuine =
                std::any_of(equilibria.begin(), equilibria.end(), [&](const EquilibriumPoint& e) {
                    return std::hypot(e.x - x, e.y - y) < kGenuineDistance;
                });
            out.fixed_points.push_back({x, y, genuine});
        }
    }
    std::sort(out.fixed_points.begin(), out.fixed_points.end(), [](const auto& p, const auto& q) {
        return p.x != q.x ? p.x < q.x : p.y < q.y;
    });
    return out;
}

OrbitSummary summarize_orbit(const Trajectory& traj, const State& target) {
    OrbitSummary out;
    if (traj.halt_reason) {
        out.finite = false;
        out.bounded = false;
    }
    for (const State& s : traj.states) {
        if (!std::isfinite(s.x) || !std::isfinite(s.y)) {
            out.finite = false;
            out.bounded = false;
        } else if (std::hypot(s.x, s.y) > kDivergenceNorm) {
            out.bounded = false;
        }
        if (std::min(s.x, s.y) < 0.0) out.positive = false;
    }
    if (traj.states.empty()) return out;

    const std::size_t n = traj.states.size();
    const std::size_t begin = n - std::max<std::size_t>(1, n / 4);
    double min_d = std::numeric_limits<double>::infinity(), max_d = 0.0;
    double min_x = min_d, max_x = -min_d, min_y = min_d, max_y = -min_d;
    for (std::size_t k = begin; k < n; ++k) {
        const State& s = traj.states[k];
        const double d = std::hypot(s.x - target.x, s.y - target.y);
        min_d = std::min(min_d, d);
        max_d = std::max(max_d, d);
        min_x = std::min(min_x, s.x);
        max_x = std::max(max_x, s.x);
        min_y = std::min(min_y, s.y);
        max_y = std::max(max_y, s.y);
    }
    out.tail_min_distance = min_d;
    out.tail_max_distance = max_d;
    out.tail_amplitude = std::max(max_x - min_x, max_y - min_y);
    return out;
}

bool is_limit_cycle(const OrbitSummary& s) {
    return s.bounded && s.positive && s.tail_min_distance > 1e-3 && s.tail_amplitude > 1e-3;
}

bool is_divergent(const OrbitSummary& s) { return !s.bounded; }

std::vector<SchemeRun> compare_schemes(const SplitSystem& sys, const std::vector<Scenario>& scenarios) {
    if (scenarios.empty()) throw std::invalid_argument("compare_schemes: no scenarios given");
    const auto equilibria = find_equilibria(sys).points;

    std::vector<SchemeRun> runs;
    runs.reserve(scenarios.size());
    for (const Scenario& sc : scenarios) {
        SchemeRun run;
        run.scenario = sc;
        run.final_state = sc.s0;
        try {
            const Trajectory traj = integrate(sys, sc.scheme, sc.s0, sc.h, sc.t_end);
            run.final_state = traj.states.back();
            run.nonfinite = traj.halt_reason.has_value();
            if (const auto audit = audit_positivity(traj); audit.first_violation) {
                run.positivity_violation_step = audit.first_violation->step;
            }
        } catch (const std::exception& e) {
            run.error = e.what();
            run.final_state.x = run.final_state.y = std::numeric_limits<double>::quiet_NaN();
        }
        double best = std::numeric_limits<double>::infinity();
        for (const auto& e : equilibria) {
            best = std::min(best, std::hypot(run.final_state.x - e.x, run.final_state.y - e.y));
        }
        run.dist_to_equilibrium = std::isfinite(run.final_state.x) && std::isfinite(run.final_state.y)
                                      ? best
                                      : std::numeric_limits<double>::quiet_NaN();
        runs.push_back(std::move(run));
    }
    return runs;
}

void write_comparison_csv(std::ostream& out, const std::vector<SchemeRun>& runs) {
    const auto old_precision = out.precision(17);
    out << "scheme,h,x0,y0,t_end,final_x,final_y,dist_to_equilibrium,positivity_violation_step,"
           "nonfinite\n";
    for (const SchemeRun& r : runs) {
        const Scenario& sc = r.scenario;
        out << scheme_label(sc.scheme) << ',' << sc.h << ',' << sc.s0.x << ',' << sc.s0.y << ','
            << sc.t_end << ',' << r.final_state.x << ',' << r.final_state.y << ','
            << r.dist_to_equilibrium << ',';
        if (r.positivity_violation_step) {
            out << *r.positivity_violation_step;
        } else {
            out << "none";
        }
        out << ',' << (r.nonfinite ? "true" : "false") << '\n';
    }
    out.precision(old_precision);
}

}  // namespace nsfd
