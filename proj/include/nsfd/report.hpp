#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "nsfd/diagnostics.hpp"
#include "nsfd/equilibria.hpp"

namespace nsfd {

/// Stability report of one equilibrium:
/// {point, family, continuous: {lambda1, lambda2, T, D, verdict},
///  discrete: [{h, gamma1, gamma2, jury, verdict}], critical_step}.
/// Complex numbers are {"re": .., "im": ..}; critical_step is null for
/// non-interior or unstable points and its bound is the string "unbounded"
/// when no step restriction applies.
nlohmann::json stability_report(const SplitSystem& sys, const EquilibriumPoint& e,
                                 const std::vector<double>& steps);

/// Reports for every equilibrium in the box, plus the degenerate-family flags.
nlohmann::json equilibria_report(const SplitSystem& sys, const Box& box,
                                 const std::vector<double>& steps);

nlohmann::json to_json(const CriticalStep& c);
nlohmann::json to_json(const GhostReport& g);
nlohmann::json to_json(const OrderEstimate& o);

}  // namespace nsfd
