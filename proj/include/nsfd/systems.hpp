#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace nsfd {

/// A point of the phase plane with its time tag.
struct State {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;
};

using ScalarField = std::function<double(double x, double y)>;

/// Gain and loss rates of both species; each must be positive on the quadrant.
struct Components {
    ScalarField f_plus;
    ScalarField f_minus;
    ScalarField g_plus;
    ScalarField g_minus;
};

/// Analytic partial derivatives of the four components.
struct ComponentPartials {
    ScalarField dfp_dx, dfp_dy;
    ScalarField dfm_dx, dfm_dy;
    ScalarField dgp_dx, dgp_dy;
    ScalarField dgm_dx, dgm_dy;
};

struct ComponentValues {
    double f_plus = 0.0;
    double f_minus = 0.0;
    double g_plus = 0.0;
    double g_minus = 0.0;
};

struct PartialValues {
    double dfp_dx = 0.0, dfp_dy = 0.0;
    double dfm_dx = 0.0, dfm_dy = 0.0;
    double dgp_dx = 0.0, dgp_dy = 0.0;
    double dgm_dx = 0.0, dgm_dy = 0.0;
};

/// Sampling grid over [0, extent]^2 used to validate a system on construction.
struct ValidationGrid {
    double extent = 20.0;
    int points = 50;
};

/// A planar system x' = x (f+ - f-), y' = y (g+ - g-).
///
/// Components must be strictly positive inside the sampled quadrant and
/// non-negative on its boundary axes. When analytic partials are supplied
/// they are checked against central differences at every grid sample.
/// Immutable after construction.
class SplitSystem {
public:
    SplitSystem(std::string name, Components components,
                std::optional<ComponentPartials> partials = std::nullopt,
                ValidationGrid grid = {});

    const std::string& name() const { return name_; }
    bool has_analytic_partials() const { return partials_.has_value(); }

    /// Component values without any domain check.
    ComponentValues components(double x, double y) const;

    /// Analytic partials when present, otherwise numeric_partials().
    PartialValues partials(double x, double y) const;

    /// Right-hand side without any domain check (classical schemes may leave the quadrant).
    std::pair<double, double> rates(double x, double y) const;

    const Components& component_functions() const { return components_; }

private:
    std::string name_;
    Components components_;
    std::optional<ComponentPartials> partials_;
};

/// Right-hand side of the system; throws DomainError outside the quadrant.
std::pair<double, double> vector_field(const SplitSystem& sys, const State& s);

/// Central finite differences with step cbrt(eps) * max(1, |coord|),
/// second-order one-sided where the stencil would cross an axis.
PartialValues numeric_partials(const SplitSystem& sys, const State& s);

struct ModelParams {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
};

/// Rosenzweig-MacArthur predator-prey model split as
/// f+ = b, f- = b x + a y / (c + x), g+ = x / (c + x), g- = d.
SplitSystem make_rosenzweig_macarthur(const ModelParams& p);

ModelParams model1_params();
ModelParams model2_params();

/// Resolves "model1", "model2" or "rma:a,b,c,d".
/// Throws std::invalid_argument on a malformed selector and
/// ConstructionError on invalid parameters.
SplitSystem model_from_name(std::string_view selector);

}  // namespace nsfd
