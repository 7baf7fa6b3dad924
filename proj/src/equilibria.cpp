#include "nsfd/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "nsfd/errors.hpp"

namespace nsfd {

namespace {

constexpr int kAxisGrid = 200;
constexpr int kSeedGrid = 40;
constexpr int kNewtonIterations = 80;
constexpr double kBalanceResidual = 1e-10;
constexpr double kDedupDistance = 1e-7;

bool near_zero(double v, double scale) { return std::abs(v) <= 1e-12 * std::max(1.0, scale); }

// Roots in (0, extent] of a scalar function sampled on a uniform grid.
// Returns true when the function vanishes at every sample.
bool axis_roots(const std::function<std::pair<double, double>(double)>& gain_loss, double extent,
                std::vector<double>& roots) {
    std::vector<double> grid(kAxisGrid), value(kAxisGrid);
    std::vector<bool> zero(kAxisGrid);
    int zeros = 0;
    for (int i = 0; i < kAxisGrid; ++i) {
        grid[i] = extent * i / (kAxisGrid - 1);
        const auto [gain, loss] = gain_loss(grid[i]);
        value[i] = gain - loss;
        zero[i] = near_zero(value[i], std::max(std::abs(gain), std::abs(loss)));
        zeros += zero[i] ? 1 : 0;
    }
    if (zeros == kAxisGrid) return true;

    auto residual = [&](double s) {
        const auto [gain, loss] = gain_loss(s);
        return gain - loss;
    };
    for (int i = 0; i < kAxisGrid; ++i) {
        if (zero[i]) {
            roots.push_back(grid[i]);
            continue;
        }
        if (i == 0 || zero[i - 1] || (value[i - 1] > 0.0) == (value[i] > 0.0)) continue;
        // Bisect past the 1e-12 target down to adjacent doubles so that the
        // balance holds as exactly as the arithmetic allows.
        double lo = grid[i - 1], hi = grid[i];
        double f_lo = value[i - 1], f_hi = value[i];
        while (true) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            const double f_mid = residual(mid);
            if (f_mid == 0.0) {
                lo = hi = mid;
                f_lo = f_hi = 0.0;
                break;
            }
            if ((f_mid > 0.0) == (f_lo > 0.0)) {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
                f_hi = f_mid;
            }
        }
        roots.push_back(std::abs(f_lo) <= std::abs(f_hi) ? lo : hi);
    }
    return false;
}

struct Balance {
    double rf;  // f+ - f-
    double rg;  // g+ - g-
};

Balance balance(const SplitSystem& sys, double x, double y) {
    const auto c = sys.components(x, y);
    return {c.f_plus - c.f_minus, c.g_plus - c.g_minus};
}

Matrix2 balance_jacobian(const SplitSystem& sys, double x, double y) {
    const auto p = sys.partials(x, y);
    return Matrix2{{{p.dfp_dx - p.dfm_dx, p.dfp_dy - p.dfm_dy},
                    {p.dgp_dx - p.dgm_dx, p.dgp_dy - p.dgm_dy}}};
}

enum class NewtonOutcome { converged, degenerate, failed };

NewtonOutcome newton_balance(const SplitSystem& sys, double& x, double& y) {
    for (int it = 0; it < kNewtonIterations; ++it) {
        const Balance r = balance(sys, x, y);
        if (!std::isfinite(r.rf) || !std::isfinite(r.rg)) return NewtonOutcome::failed;
        const Matrix2 j = balance_jacobian(sys, x, y);
        const double det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        const double scale = std::max({std::abs(j[0][0]), std::abs(j[0][1]), std::abs(j[1][0]),
                                       std::abs(j[1][1])});
        const bool small = std::max(std::abs(r.rf), std::abs(r.rg)) < kBalanceResidual;
        if (std::abs(det) <= 1e-12 * std::max(scale * scale, 1e-300)) {
            return small ? NewtonOutcome::degenerate : NewtonOutcome::failed;
        }
        const double dx = (j[1][1] * r.rf - j[0][1] * r.rg) / det;
        const double dy = (j[0][0] * r.rg - j[1][0] * r.rf) / det;
        if (small && std::max(std::abs(dx), std::abs(dy)) <= 1e-14 * std::max(1.0, std::hypot(x, y))) {
            return NewtonOutcome::converged;
        }
        // Backtrack to stay inside the open quadrant, where the components are defined.
        double scale_step = 1.0;
        double nx = x - dx, ny = y - dy;
        for (int k = 0; k < 60 && (nx <= 0.0 || ny <= 0.0); ++k) {
            scale_step *= 0.5;
            nx = x - scale_step * dx;
            ny = y - scale_step * dy;
        }
        if (nx <= 0.0 || ny <= 0.0) return NewtonOutcome::failed;
        if (nx == x && ny == y) {
            return small ? NewtonOutcome::converged : NewtonOutcome::failed;
        }
        x = nx;
        y = ny;
    }
    const Balance r = balance(sys, x, y);
    return std::max(std::abs(r.rf), std::abs(r.rg)) < kBalanceResidual ? NewtonOutcome::converged
                                                                        : NewtonOutcome::failed;
}

// Searches a few ulps around a Newton root for the point with the smallest
// balance residual, ideally an exact zero.
void polish_ulps(const SplitSystem& sys, double& x, double& y) {
    auto size = [&](double px, double py) {
        const Balance r = balance(sys, px, py);
        return std::max(std::abs(r.rf), std::abs(r.rg));
    };
    double best = size(x, y);
    for (int round = 0; round < 4 && best > 0.0; ++round) {
        double bx = x, by = y;
        double px = x;
        for (int i = 0; i < 4; ++i) px = std::nextafter(px, -HUGE_VAL);
        for (int i = -4; i <= 4; ++i, px = std::nextafter(px, HUGE_VAL)) {
            double py = y;
            for (int k = 0; k < 4; ++k) py = std::nextafter(py, -HUGE_VAL);
            for (int j = -4; j <= 4; ++j, py = std::nextafter(py, HUGE_VAL)) {
                const double v = size(px, py);
                if (v < best) {
                    best = v;
                    bx = px;
                    by = py;
                }
            }
        }
        if (bx == x && by == y) break;
        x = bx;
        y = by;
    }
}

void push_unique(std::vector<EquilibriumPoint>& pts, EquilibriumPoint p) {
    for (const auto& q : pts) {
        if (std::hypot(q.x - p.x, q.y - p.y) < kDedupDistance) return;
    }
    pts.push_back(p);
}

void require_family(const EquilibriumPoint& e, const char* who) {
    if (family_of(e.x, e.y) != e.family) {
        std::ostringstream os;
        os << who << ": point (" << e.x << ", " << e.y << ") tagged " << to_string(e.family)
           << " but coordinates imply " << to_string(family_of(e.x, e.y));
        throw FamilyMismatch(os.str());
    }
}

Verdict verdict_from_real_parts(double re1, double re2) {
    if (re1 > kMarginalBand || re2 > kMarginalBand) return Verdict::unstable;
    if (std::abs(re1) <= kMarginalBand || std::abs(re2) <= kMarginalBand) return Verdict::marginal;
    return Verdict::asymptotically_stable;
}

Verdict verdict_from_moduli(double m1, double m2) {
    if (m1 > 1.0 + kMarginalBand || m2 > 1.0 + kMarginalBand) return Verdict::unstable;
    if (std::abs(m1 - 1.0) <= kMarginalBand || std::abs(m2 - 1.0) <= kMarginalBand) {
        return Verdict::marginal;
    }
    return Verdict::asymptotically_stable;
}

// Diagonal-scaled linearisation entries at an interior point:
// x (df+/dx - df-/dx), x (df+/dy - df-/dy), y (dg+/dx - dg-/dx), y (dg+/dy - dg-/dy).
struct ScaledJacobian {
    double xx, xy, yx, yy;
    double trace() const { return xx + yy; }
    double det() const { return xx * yy - xy * yx; }
};

ScaledJacobian scaled_jacobian(const SplitSystem& sys, double x, double y) {
    const auto p = sys.partials(x, y);
    return {x * (p.dfp_dx - p.dfm_dx), x * (p.dfp_dy - p.dfm_dy), y * (p.dgp_dx - p.dgm_dx),
            y * (p.dgp_dy - p.dgm_dy)};
}

std::array<std::complex<double>, 2> quadratic_roots(double trace, double det) {
    const double disc = trace * trace - 4.0 * det;
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        // Avoid cancellation: q = (T + sign(T) sqrt(disc)) / 2, roots q and det / q.
        const double q = 0.5 * (trace + std::copysign(root, trace));
        if (q == 0.0) return {std::complex<double>(0.0), std::complex<double>(0.0)};
        double r1 = q, r2 = det / q;
        if (r1 < r2) std::swap(r1, r2);
        return {std::complex<double>(r1), std::complex<double>(r2)};
    }
    const double im = 0.5 * std::sqrt(-disc);
    return {std::complex<double>(0.5 * trace, im), std::complex<double>(0.5 * trace, -im)};
}

std::optional<double> smallest_positive_root(double a, double b, double c) {
    std::vector<double> roots;
    if (std::abs(a) <= 1e-15 * std::max({std::abs(b), std::abs(c), 1.0})) {
        if (b != 0.0) roots.push_back(-c / b);
    } else {
        const double disc = b * b - 4.0 * a * c;
        if (disc < 0.0) return std::nullopt;
        const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
        if (q != 0.0) {
            roots.push_back(q / a);
            roots.push_back(c / q);
        } else {
            roots.push_back(0.0);
        }
    }
    std::optional<double> best;
    for (double r : roots) {
        if (r > 0.0 && (!best || r < *best)) best = r;
    }
    return best;
}

}  // namespace

std::string to_string(Family f) {
    switch (f) {
        case Family::O: return "O";
        case Family::E1: return "E1";
        case Family::E2: return "E2";
        case Family::E3: return "E3";
    }
    return "?";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::asymptotically_stable: return "asymptotically_stable";
        case Verdict::unstable: return "unstable";
        case Verdict::marginal: return "marginal";
    }
    return "?";
}

std::string to_string(BindingCondition b) {
    switch (b) {
        case BindingCondition::a: return "a";
        case BindingCondition::c: return "c";
        case BindingCondition::none: return "none";
    }
    return "?";
}

Family family_of(double x, double y) {
    const bool x_zero = std::abs(x) < kZeroCoordinate;
    const bool y_zero = std::abs(y) < kZeroCoordinate;
    if (x_zero && y_zero) return Family::O;
    if (y_zero) return Family::E1;
    if (x_zero) return Family::E2;
    return Family::E3;
}

EquilibriumSearch find_equilibria(const SplitSystem& sys, const Box& box) {
    if (!(box.x_max > 0.0) || !(box.y_max > 0.0)) {
        throw std::invalid_argument("find_equilibria: box extents must be positive");
    }
    EquilibriumSearch out;
    out.points.push_back({0.0, 0.0, Family::O});

    std::vector<double> roots;
    out.degenerate_e1 = axis_roots(
        [&](double x) {
            const auto c = sys.components(x, 0.0);
            return std::pair{c.f_plus, c.f_minus};
        },
        box.x_max, roots);
    for (double x : roots) {
        if (x >= kZeroCoordinate) push_unique(out.points, {x, 0.0, Family::E1});
    }

    roots.clear();
    out.degenerate_e2 = axis_roots(
        [&](double y) {
            const auto c = sys.components(0.0, y);
            return std::pair{c.g_plus, c.g_minus};
        },
        box.y_max, roots);
    for (double y : roots) {
        if (y >= kZeroCoordinate) push_unique(out.points, {0.0, y, Family::E2});
    }

    for (int i = 0; i < kSeedGrid; ++i) {
        for (int j = 0; j < kSeedGrid; ++j) {
            double x = box.x_max * (i + 0.5) / kSeedGrid;
            double y = box.y_max * (j + 0.5) / kSeedGrid;
            const NewtonOutcome outcome = newton_balance(sys, x, y);
            if (outcome == NewtonOutcome::degenerate) {
                out.degenerate_e3 = true;
                continue;
            }
            if (outcome != NewtonOutcome::converged) continue;
            polish_ulps(sys, x, y);
            if (x < kZeroCoordinate || y < kZeroCoordinate) continue;
            if (x > box.x_max * (1.0 + 1e-12) || y > box.y_max * (1.0 + 1e-12)) continue;
            push_unique(out.points, {x, y, Family::E3});
        }
    }

    std::sort(out.points.begin(), out.points.end(), [](const auto& p, const auto& q) {
        return p.x != q.x ? p.x < q.x : p.y < q.y;
    });
    return out;
}

ContinuousStability continuous_eigs(const SplitSystem& sys, const EquilibriumPoint& e) {
    require_family(e, "continuous_eigs");
    ContinuousStability out;
    switch (e.family) {
        case Family::O: {
            const Balance r = balance(sys, 0.0, 0.0);
            out.lambda1 = r.rf;
            out.lambda2 = r.rg;
            break;
        }
        case Family::E1: {
            const auto j = scaled_jacobian(sys, e.x, 0.0);
            out.lambda1 = j.xx;
            out.lambda2 = balance(sys, e.x, 0.0).rg;
            break;
        }
        case Family::E2: {
            const auto j = scaled_jacobian(sys, 0.0, e.y);
            out.lambda1 = balance(sys, 0.0, e.y).rf;
            out.lambda2 = j.yy;
            break;
        }
        case Family::E3: {
            const auto j = scaled_jacobian(sys, e.x, e.y);
            const auto roots = quadratic_roots(j.trace(), j.det());
            out.lambda1 = roots[0];
            out.lambda2 = roots[1];
            out.trace = j.trace();
            out.det = j.det();
            out.verdict = verdict_from_real_parts(out.lambda1.real(), out.lambda2.real());
            return out;
        }
    }
    out.trace = (out.lambda1 + out.lambda2).real();
    out.det = (out.lambda1 * out.lambda2).real();
    out.verdict = verdict_from_real_parts(out.lambda1.real(), out.lambda2.real());
    return out;
}

Verdict classify_continuous(const SplitSystem& sys, const EquilibriumPoint& e) {
    return continuous_eigs(sys, e).verdict;
}

Matrix2 continuous_jacobian(const SplitSystem& sys, const State& s) {
    const auto c = sys.components(s.x, s.y);
    const auto p = sys.partials(s.x, s.y);
    return Matrix2{{{c.f_plus - c.f_minus + s.x * (p.dfp_dx - p.dfm_dx), s.x * (p.dfp_dy - p.dfm_dy)},
                    {s.y * (p.dgp_dx - p.dgm_dx), c.g_plus - c.g_minus + s.y * (p.dgp_dy - p.dgm_dy)}}};
}

Matrix2 nsfd_map_jacobian(const SplitSystem& sys, const State& s, double h) {
    if (!(s.x >= 0.0) || !(s.y >= 0.0)) {
        throw DomainError("nsfd_map_jacobian: state outside positive quadrant");
    }
    if (!(h > 0.0)) throw std::invalid_argument("nsfd_map_jacobian: step size must be positive");
    const auto c = sys.components(s.x, s.y);
    const auto p = sys.partials(s.x, s.y);
    const double fp = 1.0 + h * c.f_plus, fm = 1.0 + h * c.f_minus;
    const double gp = 1.0 + h * c.g_plus, gm = 1.0 + h * c.g_minus;
    const double hx = h * s.x / (fm * fm);
    const double hy = h * s.y / (gm * gm);
    return Matrix2{{{fp / fm + hx * (fm * p.dfp_dx - fp * p.dfm_dx), hx * (fm * p.dfp_dy - fp * p.dfm_dy)},
                    {hy * (gm * p.dgp_dx - gp * p.dgm_dx), gp / gm + hy * (gm * p.dgp_dy - gp * p.dgm_dy)}}};
}

std::array<std::complex<double>, 2> eigenvalues(const Matrix2& m) {
    return quadratic_roots(m[0][0] + m[1][1], m[0][0] * m[1][1] - m[0][1] * m[1][0]);
}

JuryConditions jury_check(double alpha, double beta) {
    return {1.0 + alpha + beta > 0.0, 1.0 - alpha + beta > 0.0, beta < 1.0};
}

DiscreteStability discrete_eigs(const SplitSystem& sys, const EquilibriumPoint& e, double h) {
    require_family(e, "discrete_eigs");
    if (!(h > 0.0)) throw std::invalid_argument("discrete_eigs: step size must be positive");
    DiscreteStability out;
    out.h = h;
    auto ratio = [h](double gain, double loss) { return (1.0 + h * gain) / (1.0 + h * loss); };
    switch (e.family) {
        case Family::O: {
            const auto c = sys.components(0.0, 0.0);
            out.gamma1 = ratio(c.f_plus, c.f_minus);
            out.gamma2 = ratio(c.g_plus, c.g_minus);
            break;
        }
        case Family::E1: {
            const auto c = sys.components(e.x, 0.0);
            const auto j = scaled_jacobian(sys, e.x, 0.0);
            out.gamma1 = 1.0 + h * j.xx / (1.0 + h * c.f_plus);
            out.gamma2 = ratio(c.g_plus, c.g_minus);
            break;
        }
        case Family::E2: {
            const auto c = sys.components(0.0, e.y);
            const auto j = scaled_jacobian(sys, 0.0, e.y);
            out.gamma1 = ratio(c.f_plus, c.f_minus);
            out.gamma2 = 1.0 + h * j.yy / (1.0 + h * c.g_plus);
            break;
        }
        case Family::E3: {
            const auto c = sys.components(e.x, e.y);
            const auto j = scaled_jacobian(sys, e.x, e.y);
            const double pf = 1.0 + h * c.f_plus, pg = 1.0 + h * c.g_plus;
            const double lin = h * (j.xx / pf + j.yy / pg);
            out.trace = 2.0 + lin;
            out.det = 1.0 + lin + h * h * j.det() / (pf * pg);
            const auto roots = quadratic_roots(out.trace, out.det);
            out.gamma1 = roots[0];
            out.gamma2 = roots[1];
            out.jury = jury_check(out.trace, out.det);
            out.verdict = verdict_from_moduli(std::abs(out.gamma1), std::abs(out.gamma2));
            return out;
        }
    }
    out.trace = (out.gamma1 + out.gamma2).real();
    out.det = (out.gamma1 * out.gamma2).real();
    out.jury = jury_check(out.trace, out.det);
    out.verdict = verdict_from_moduli(std::abs(out.gamma1), std::abs(out.gamma2));
    return out;
}

CriticalStep critical_step_E3(const SplitSystem& sys, const EquilibriumPoint& e) {
    require_family(e, "critical_step_E3");
    if (e.family != Family::E3) {
        throw FamilyMismatch("critical_step_E3: point is not an interior (E3) equilibrium");
    }
    const auto j = scaled_jacobian(sys, e.x, e.y);
    const auto c = sys.components(e.x, e.y);

    CriticalStep out;
    out.trace = j.trace();
    out.det = j.det();
    out.coupling = j.xx * c.g_plus + j.yy * c.f_plus;
    if (!(out.trace < 0.0 && out.det > 0.0)) {
        std::ostringstream os;
        os << "critical_step_E3: equilibrium not asymptotically stable (T=" << out.trace
           << ", D=" << out.det << ")";
        throw NotStableError(os.str());
    }

    const double dc = out.det + out.coupling;
    if (dc > 0.0) out.bound_c = -out.trace / dc;

    const double quad = 4.0 * c.f_plus * c.g_plus + 2.0 * out.coupling + out.det;
    const double lin = 4.0 * (c.f_plus + c.g_plus) + 2.0 * out.trace;
    out.bound_a = smallest_positive_root(quad, lin, 4.0);

    if (out.bound_c && (!out.bound_a || *out.bound_c <= *out.bound_a)) {
        out.bound = out.bound_c;
        out.binding = BindingCondition::c;
    } else if (out.bound_a) {
        out.bound = out.bound_a;
        out.binding = BindingCondition::a;
    }
    return out;
}

}  // namespace nsfd
