#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nsfd/systems.hpp"

namespace nsfd {

/// Effective step phi(h) used by the extended NSFD scheme; phi(h) = h + O(h^2).
class StepWeight {
public:
    /// phi(h) = h.
    static StepWeight identity();
    /// phi(h) = (1 - exp(-rate h)) / rate, rate > 0.
    static StepWeight exponential(double rate);
    /// Parses "identity" or "exp:RATE".
    static StepWeight parse(std::string_view text);

    double operator()(double h) const;
    const std::string& label() const { return label_; }

private:
    StepWeight(std::string label, std::function<double(double)> fn)
        : label_(std::move(label)), fn_(std::move(fn)) {}

    std::string label_;
    std::function<double(double)> fn_;
};

enum class SchemeTag { nsfd, ensfd, euler, rk2, rk4 };

struct SchemeId {
    SchemeTag tag = SchemeTag::nsfd;
    std::optional<StepWeight> weight;  // required for ensfd

    static SchemeId nsfd() { return {SchemeTag::nsfd, std::nullopt}; }
    static SchemeId ensfd(StepWeight w) { return {SchemeTag::ensfd, std::move(w)}; }
    static SchemeId euler() { return {SchemeTag::euler, std::nullopt}; }
    static SchemeId rk2() { return {SchemeTag::rk2, std::nullopt}; }
    static SchemeId rk4() { return {SchemeTag::rk4, std::nullopt}; }

    /// True for NSFD and ENSFD, whose maps keep the quadrant invariant.
    bool is_nonstandard() const { return tag == SchemeTag::nsfd || tag == SchemeTag::ensfd; }
};

std::string to_string(SchemeTag tag);
/// Tag name, with the weight appended for ensfd, e.g. "ensfd[exp:2]".
std::string scheme_label(const SchemeId& scheme);
/// "nsfd", "ensfd", "euler", "rk2", "rk4"; ensfd takes its weight from `weight`.
SchemeId parse_scheme(std::string_view text, std::optional<StepWeight> weight = std::nullopt);

State nsfd_step(const SplitSystem& sys, const State& s, double h);
State ensfd_step(const SplitSystem& sys, const State& s, double h, const StepWeight& w);
State euler_step(const SplitSystem& sys, const State& s, double h);
/// Explicit midpoint rule.
State rk2_step(const SplitSystem& sys, const State& s, double h);
/// Classical four-stage Runge-Kutta.
State rk4_step(const SplitSystem& sys, const State& s, double h);

/// Dispatches one step of the given scheme.
State step(const SplitSystem& sys, const SchemeId& scheme, const State& s, double h);

struct Trajectory {
    SchemeId scheme;
    double h = 0.0;
    std::vector<State> states;
    /// Set when integration stopped before the last grid point.
    std::optional<std::string> halt_reason;
};

/// Runs floor((t_end - t0) / h) steps on the grid t_k = t0 + k h.
/// Negative states from classical schemes are kept; a non-finite stage
/// halts the run and records the reason.
Trajectory integrate(const SplitSystem& sys, const SchemeId& scheme, const State& s0, double h,
                     double t_end);

/// CSV with header `k,t,x,y` and 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace nsfd
