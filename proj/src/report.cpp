#include "nsfd/report.hpp"

namespace nsfd {

namespace {

using nlohmann::json;

json complex_json(std::complex<double> z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json optional_bound(const std::optional<double>& b) {
    return b ? json(*b) : json("unbounded");
}

}  // namespace

json to_json(const CriticalStep& c) {
    return json{{"bound", optional_bound(c.bound)},
                {"binding_condition", to_string(c.binding)},
                {"bound_a", optional_bound(c.bound_a)},
                {"bound_c", optional_bound(c.bound_c)},
                {"T", c.trace},
                {"D", c.det},
                {"C", c.coupling}};
}

json stability_report(const SplitSystem& sys, const EquilibriumPoint& e,
                      const std::vector<double>& steps) {
    const ContinuousStability cont = continuous_eigs(sys, e);
    json discrete = json::array();
    for (double h : steps) {
        const DiscreteStability d = discrete_eigs(sys, e, h);
        discrete.push_back(json{{"h", h},
                                {"gamma1", complex_json(d.gamma1)},
                                {"gamma2", complex_json(d.gamma2)},
                                {"trace", d.trace},
                                {"det", d.det},
                                {"jury", {{"a", d.jury.a}, {"b", d.jury.b}, {"c", d.jury.c}}},
                                {"spectral_radius", d.spectral_radius()},
                                {"verdict", to_string(d.verdict)}});
    }
    json critical = nullptr;
    if (e.family == Family::E3 && cont.verdict == Verdict::asymptotically_stable) {
        critical = to_json(critical_step_E3(sys, e));
    }
    return json{{"point", {e.x, e.y}},
                {"family", to_string(e.family)},
                {"continuous",
                 {{"lambda1", complex_json(cont.lambda1)},
                  {"lambda2", complex_json(cont.lambda2)},
                  {"T", cont.trace},
                  {"D", cont.det},
                  {"verdict", to_string(cont.verdict)}}},
                {"discrete", discrete},
                {"critical_step", critical}};
}

json equilibria_report(const SplitSystem& sys, const Box& box, const std::vector<double>& steps) {
    const EquilibriumSearch search = find_equilibria(sys, box);
    json entries = json::array();
    for (const auto& e : search.points) entries.push_back(stability_report(sys, e, steps));
    return json{{"box", {box.x_max, box.y_max}},
                {"degenerate", {{"E1", search.degenerate_e1},
                                {"E2", search.degenerate_e2},
                                {"E3", search.degenerate_e3}}},
                {"equilibria", entries}};
}

json to_json(const GhostReport& g) {
    json points = json::array();
    for (const auto& p : g.fixed_points) {
        points.push_back(json{{"x", p.x}, {"y", p.y}, {"genuine", p.genuine}});
    }
    return json{{"scheme", scheme_label(g.scheme)},
                {"h", g.h},
                {"search_box", {g.search_box.x_max, g.search_box.y_max}},
                {"fixed_points", points},
                {"ghost_count", g.ghost_count()}};
}

json to_json(const OrderEstimate& o) {
    return json{{"scheme", scheme_label(o.scheme)},
                {"slope", o.slope},
                {"intercept", o.intercept},
                {"residual", o.residual},
                {"steps", o.steps},
                {"errors", o.errors}};
}

}  // namespace nsfd
