#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "nsfd/systems.hpp"

namespace nsfd {

enum class Family { O, E1, E2, E3 };
std::string to_string(Family f);

/// Coordinates below this magnitude count as zero when tagging families.
inline constexpr double kZeroCoordinate = 1e-9;

struct EquilibriumPoint {
    double x = 0.0;
    double y = 0.0;
    Family family = Family::O;
};

/// Family implied by the coordinates alone.
Family family_of(double x, double y);

/// Search region [0, x_max] x [0, y_max].
struct Box {
    double x_max = 20.0;
    double y_max = 20.0;
};

struct EquilibriumSearch {
    /// Sorted lexicographically by (x, y); always contains the origin.
    std::vector<EquilibriumPoint> points;
    /// Set when a balance equation vanishes along a whole axis (or curve), in
    /// which case that family is a continuum and no isolated points are listed.
    bool degenerate_e1 = false;
    bool degenerate_e2 = false;
    bool degenerate_e3 = false;
};

/// O always; E1/E2 by sign-change bracketing on a 200-point axis grid with
/// bisection to 1e-12; E3 by Newton from a 40x40 seed grid, deduplicated at 1e-7.
EquilibriumSearch find_equilibria(const SplitSystem& sys, const Box& box = {});

enum class Verdict { asymptotically_stable, unstable, marginal };
std::string to_string(Verdict v);

/// Eigenvalue/multiplier distance from the stability boundary treated as marginal.
inline constexpr double kMarginalBand = 1e-9;

struct ContinuousStability {
    std::complex<double> lambda1;
    std::complex<double> lambda2;
    double trace = 0.0;
    double det = 0.0;
    Verdict verdict = Verdict::marginal;
};

/// Closed-form eigenvalues per family of the linearisation at an equilibrium.
ContinuousStability continuous_eigs(const SplitSystem& sys, const EquilibriumPoint& e);

/// Applies the family's linear asymptotic stability conditions.
Verdict classify_continuous(const SplitSystem& sys, const EquilibriumPoint& e);

/// Row-major 2x2 matrix.
using Matrix2 = std::array<std::array<double, 2>, 2>;

/// Jacobian of the continuous right-hand side at s.
Matrix2 continuous_jacobian(const SplitSystem& sys, const State& s);

/// Analytic Jacobian of the NSFD map at s for step h.
Matrix2 nsfd_map_jacobian(const SplitSystem& sys, const State& s, double h);

/// Eigenvalues of a real 2x2 matrix.
std::array<std::complex<double>, 2> eigenvalues(const Matrix2& m);

struct JuryConditions {
    bool a = false;  // 1 + alpha + beta > 0
    bool b = false;  // 1 - alpha + beta > 0
    bool c = false;  // beta < 1
    bool all() const { return a && b && c; }
};

/// Conditions for both roots of z^2 - alpha z + beta to lie strictly inside the unit circle.
JuryConditions jury_check(double alpha, double beta);

struct DiscreteStability {
    double h = 0.0;
    std::complex<double> gamma1;
    std::complex<double> gamma2;
    double trace = 0.0;
    double det = 0.0;
    JuryConditions jury;
    Verdict verdict = Verdict::marginal;

    double spectral_radius() const { return std::max(std::abs(gamma1), std::abs(gamma2)); }
};

/// Multipliers of the NSFD map at an equilibrium for step h.
DiscreteStability discrete_eigs(const SplitSystem& sys, const EquilibriumPoint& e, double h);

enum class BindingCondition { a, c, none };
std::string to_string(BindingCondition b);

struct CriticalStep {
    /// Largest h such that every 0 < h' < bound keeps the interior point stable; nullopt = unbounded.
    std::optional<double> bound;
    BindingCondition binding = BindingCondition::none;
    std::optional<double> bound_a;
    std::optional<double> bound_c;
    double trace = 0.0;  // T
    double det = 0.0;    // D
    double coupling = 0.0;  // C
};

/// Step-size bound preserving stability of a stable interior equilibrium.
/// Condition (b) never binds when D > 0. Condition (c) requires h < -T/(D+C)
/// when D + C > 0. Condition (a) requires the quadratic
///   (4 f+ g+ + 2C + D) h^2 + (4 (f+ + g+) + 2T) h + 4 > 0
/// obtained by clearing the denominators (1 + h f+)(1 + h g+).
CriticalStep critical_step_E3(const SplitSystem& sys, const EquilibriumPoint& e);

}  // namespace nsfd
