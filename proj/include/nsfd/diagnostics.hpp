#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nsfd/equilibria.hpp"
#include "nsfd/integrators.hpp"
#include "nsfd/systems.hpp"

namespace nsfd {

// ---------------------------------------------------------------------------
// Convergence order
// ---------------------------------------------------------------------------

struct OrderEstimate {
    SchemeId scheme;
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<double> steps;
    /// Sup over grid points of the max-norm error against the reference.
    std::vector<double> errors;
    /// Root-mean-square residual of the log-log fit.
    double residual = 0.0;
};

/// Least-squares slope of log(error) against log(h).
/// `steps` must be strictly decreasing, hold at least four values, and each
/// must divide t_end - t0 evenly. The reference is RK4 at min(steps) / 100.
OrderEstimate estimate_order(const SplitSystem& sys, const SchemeId& scheme, const State& s0,
                             double t_end, const std::vector<double>& steps);

// ---------------------------------------------------------------------------
// Positivity
// ---------------------------------------------------------------------------

struct PositivityViolation {
    std::size_t step = 0;
    State state;
};

struct PositivityAudit {
    SchemeId scheme;
    double h = 0.0;
    State initial;
    std::optional<PositivityViolation> first_violation;
};

PositivityAudit audit_positivity(const Trajectory& traj);

// ---------------------------------------------------------------------------
// Ghost fixed points
// ---------------------------------------------------------------------------

struct MapFixedPoint {
    double x = 0.0;
    double y = 0.0;
    bool genuine = false;
};

struct GhostReport {
    SchemeId scheme;
    double h = 0.0;
    Box search_box;
    std::vector<MapFixedPoint> fixed_points;

    std::size_t ghost_count() const;
};

/// Fixed points of one step of `scheme` located by Newton from a 60x60 seed
/// grid over the box. Classical schemes are searched on the box enlarged by
/// 10% along both axes, still inside the closed quadrant. Points with residual
/// below 1e-10 are kept, deduplicated at 1e-6, and marked genuine when within
/// 1e-6 of an equilibrium of the continuous system.
GhostReport detect_ghosts(const SplitSystem& sys, const SchemeId& scheme, double h,
                          const Box& box = {});

// ---------------------------------------------------------------------------
// Long-run orbit behaviour
// ---------------------------------------------------------------------------

inline constexpr double kDivergenceNorm = 1e12;

struct OrbitSummary {
    bool finite = true;
    bool bounded = true;   // finite and every |state| <= 1e12
    bool positive = true;  // every state in the closed quadrant
    /// Over the last 25% of states.
    double tail_min_distance = 0.0;
    double tail_max_distance = 0.0;
    /// Largest coordinate range (max - min of x or y) over the tail.
    double tail_amplitude = 0.0;
};

OrbitSummary summarize_orbit(const Trajectory& traj, const State& target);

/// Bounded, positive, tail stays > 1e-3 from the target and oscillates with amplitude > 1e-3.
bool is_limit_cycle(const OrbitSummary& s);
bool is_divergent(const OrbitSummary& s);

// ---------------------------------------------------------------------------
// Scheme comparison
// ---------------------------------------------------------------------------

struct Scenario {
    SchemeId scheme;
    double h = 0.0;
    State s0;
    double t_end = 0.0;
};

struct SchemeRun {
    Scenario scenario;
    State final_state;
    /// Distance from the final state to the nearest equilibrium in [0,20]^2.
    double dist_to_equilibrium = 0.0;
    std::optional<std::size_t> positivity_violation_step;
    bool nonfinite = false;
    /// Set when the run raised an error; the row is still emitted.
    std::optional<std::string> error;
};

std::vector<SchemeRun> compare_schemes(const SplitSystem& sys, const std::vector<Scenario>& scenarios);

/// CSV header `scheme,h,x0,y0,t_end,final_x,final_y,dist_to_equilibrium,positivity_violation_step,nonfinite`.
void write_comparison_csv(std::ostream& out, const std::vector<SchemeRun>& runs);

}  // namespace nsfd
