#include "nsfd/integrators.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nsfd/errors.hpp"

namespace nsfd {

namespace {

void require_positive_step(double h, const char* who) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw std::invalid_argument(std::string(who) + ": step size must be positive and finite");
    }
}

void require_quadrant(const State& s, const char* who) {
    if (!(s.x >= 0.0) || !(s.y >= 0.0) || !std::isfinite(s.x) || !std::isfinite(s.y)) {
        std::ostringstream os;
        os << who << ": state (" << s.x << ", " << s.y << ") outside positive quadrant";
        throw DomainError(os.str());
    }
}

struct Rate {
    double dx;
    double dy;
};

Rate stage(const SplitSystem& sys, double x, double y, const char* who) {
    const auto [dx, dy] = sys.rates(x, y);
    if (!std::isfinite(dx) || !std::isfinite(dy)) {
        std::ostringstream os;
        os << who << ": non-finite stage at (" << x << ", " << y << ")";
        throw NonFiniteError(os.str());
    }
    return {dx, dy};
}

State finish(const State& s, double h, double x, double y, const char* who) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
        throw NonFiniteError(std::string(who) + ": non-finite state");
    }
    return {x, y, s.t + h};
}

// The rational map x (1 + k f+)/(1 + k f-) with k the (effective) step.
State nonstandard_map(const SplitSystem& sys, const State& s, double k) {
    const auto c = sys.components(s.x, s.y);
    return {s.x * (1.0 + k * c.f_plus) / (1.0 + k * c.f_minus),
            s.y * (1.0 + k * c.g_plus) / (1.0 + k * c.g_minus), s.t};
}

}  // namespace

StepWeight StepWeight::identity() {
    return StepWeight("identity", [](double h) { return h; });
}

StepWeight StepWeight::exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw std::invalid_argument("exponential step weight needs a positive finite rate");
    }
    std::ostringstream label;
    label << "exp:" << rate;
    return StepWeight(label.str(), [rate](double h) { return -std::expm1(-rate * h) / rate; });
}

StepWeight StepWeight::parse(std::string_view text) {
    if (text == "identity") return identity();
    constexpr std::string_view prefix = "exp:";
    if (text.substr(0, prefix.size()) == prefix) {
        const std::string number(text.substr(prefix.size()));
        std::size_t used = 0;
        double rate = 0.0;
        try {
            rate = std::stod(number, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != number.size()) {
            throw std::invalid_argument("cannot parse step weight rate '" + number + "'");
        }
        return exponential(rate);
    }
    throw std::invalid_argument("unknown step weight '" + std::string(text) +
                                "' (expected identity or exp:LAMBDA)");
}

double StepWeight::operator()(double h) const { return fn_(h); }

std::string to_string(SchemeTag tag) {
    switch (tag) {
        case SchemeTag::nsfd: return "nsfd";
        case SchemeTag::ensfd: return "ensfd";
        case SchemeTag::euler: return "euler";
        case SchemeTag::rk2: return "rk2";
        case SchemeTag::rk4: return "rk4";
    }
    return "unknown";
}

std::string scheme_label(const SchemeId& scheme) {
    if (scheme.tag == SchemeTag::ensfd && scheme.weight) {
        return "ensfd[" + scheme.weight->label() + "]";
    }
    return to_string(scheme.tag);
}

SchemeId parse_scheme(std::string_view text, std::optional<StepWeight> weight) {
    if (text == "nsfd") return SchemeId::nsfd();
    if (text == "ensfd") return SchemeId::ensfd(weight ? *weight : StepWeight::identity());
    if (text == "euler") return SchemeId::euler();
    if (text == "rk2") return SchemeId::rk2();
    if (text == "rk4") return SchemeId::rk4();
    throw std::invalid_argument("unknown scheme '" + std::string(text) +
                                "' (expected nsfd, ensfd, euler, rk2 or rk4)");
}

State nsfd_step(const SplitSystem& sys, const State& s, double h) {
    require_positive_step(h, "nsfd_step");
    require_quadrant(s, "nsfd_step");
    State next = nonstandard_map(sys, s, h);
    next.t = s.t + h;
    return next;
}

State ensfd_step(const SplitSystem& sys, const State& s, double h, const StepWeight& w) {
    require_positive_step(h, "ensfd_step");
    require_quadrant(s, "ensfd_step");
    const double effective = w(h);
    if (!(effective > 0.0) || !std::isfinite(effective)) {
        throw std::invalid_argument("ensfd_step: step weight must map h > 0 to a positive value");
    }
    State next = nonstandard_map(sys, s, effective);
    next.t = s.t + h;
    return next;
}

State euler_step(const SplitSystem& sys, const State& s, double h) {
    require_positive_step(h, "euler_step");
    const Rate k1 = stage(sys, s.x, s.y, "euler_step");
    return finish(s, h, s.x + h * k1.dx, s.y + h * k1.dy, "euler_step");
}

State rk2_step(const SplitSystem& sys, const State& s, double h) {
    require_positive_step(h, "rk2_step");
    const Rate k1 = stage(sys, s.x, s.y, "rk2_step");
    const Rate k2 = stage(sys, s.x + 0.5 * h * k1.dx, s.y + 0.5 * h * k1.dy, "rk2_step");
    return finish(s, h, s.x + h * k2.dx, s.y + h * k2.dy, "rk2_step");
}

State rk4_step(const SplitSystem& sys, const State& s, double h) {
    require_positive_step(h, "rk4_step");
    const Rate k1 = stage(sys, s.x, s.y, "rk4_step");
    const Rate k2 = stage(sys, s.x + 0.5 * h * k1.dx, s.y + 0.5 * h * k1.dy, "rk4_step");
    const Rate k3 = stage(sys, s.x + 0.5 * h * k2.dx, s.y + 0.5 * h * k2.dy, "rk4_step");
    const Rate k4 = stage(sys, s.x + h * k3.dx, s.y + h * k3.dy, "rk4_step");
    const double x = s.x + h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    const double y = s.y + h / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
    return finish(s, h, x, y, "rk4_step");
}

State step(const SplitSystem& sys, const SchemeId& scheme, const State& s, double h) {
    switch (scheme.tag) {
        case SchemeTag::nsfd: return nsfd_step(sys, s, h);
        case SchemeTag::ensfd:
            if (!scheme.weight) throw std::invalid_argument("ensfd scheme requires a step weight");
            return ensfd_step(sys, s, h, *scheme.weight);
        case SchemeTag::euler: return euler_step(sys, s, h);
        case SchemeTag::rk2: return rk2_step(sys, s, h);
        case SchemeTag::rk4: return rk4_step(sys, s, h);
    }
    throw std::logic_error("unhandled scheme tag");
}

Trajectory integrate(const SplitSystem& sys, const SchemeId& scheme, const State& s0, double h,
                     double t_end) {
    require_positive_step(h, "integrate");
    if (!(t_end > s0.t)) {
        throw std::invalid_argument("integrate: t_end must exceed the initial time");
    }
    if (scheme.tag == SchemeTag::ensfd && !scheme.weight) {
        throw std::invalid_argument("ensfd scheme requires a step weight");
    }
    // Guard the floor against ratios such as 0.3 / 0.1 = 2.9999999999999996.
    const double ratio = (t_end - s0.t) / h;
    const auto steps = static_cast<long long>(std::floor(ratio * (1.0 + 1e-12)));

    Trajectory traj{scheme, h, {}, std::nullopt};
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    traj.states.push_back(s0);
    State current = s0;
    for (long long k = 1; k <= steps; ++k) {
        try {
            current = step(sys, scheme, current, h);
        } catch (const NonFiniteError& e) {
            std::ostringstream os;
            os << "non-finite state at step " << k << ": " << e.what();
            traj.halt_reason = os.str();
            break;
        }
        current.t = s0.t + static_cast<double>(k) * h;
        traj.states.push_back(current);
    }
    return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    const auto old_precision = out.precision(17);
    out << "k,t,x,y\n";
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const State& s = traj.states[k];
        out << k << ',' << s.t << ',' << s.x << ',' << s.y << '\n';
    }
    out.precision(old_precision);
}

}  // namespace nsfd
