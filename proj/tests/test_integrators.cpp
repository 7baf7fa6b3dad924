#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "nsfd/equilibria.hpp"
#include "nsfd/errors.hpp"
#include "nsfd/integrators.hpp"

using namespace nsfd;

namespace {

SplitSystem unit_system() {
    auto one = [](double, double) { return 1.0; };
    return SplitSystem("unit", Components{one, one, one, one});
}

// Smooth test system with a closed form is not available for class (E); the
// logistic equation x' = x (1 - x) with frozen y is: x(t) = x0 e^t / (1 - x0 + x0 e^t).
SplitSystem logistic_system() {
    auto one = [](double, double) { return 1.0; };
    auto grow = [](double x, double) { return x; };
    return SplitSystem("logistic", Components{one, grow, one, one});
}

double logistic_exact(double x0, double t) {
    return x0 * std::exp(t) / (1.0 - x0 + x0 * std::exp(t));
}

}  // namespace

TEST_CASE("nsfd_step") {
    const auto m1 = model_from_name("model1");
    SUBCASE("equilibrium (1,0) is fixed for any h") {
        for (double h : {0.1, 1.0, 10.0}) {
            const State next = nsfd_step(m1, {1.0, 0.0, 0.0}, h);
            CHECK(next.x == 1.0);
            CHECK(next.y == 0.0);
            CHECK(next.t == h);
        }
    }
    SUBCASE("balanced gains and losses give the identity") {
        const State next = nsfd_step(unit_system(), {3.0, 5.0, 0.0}, 0.7);
        CHECK(next.x == 3.0);
        CHECK(next.y == 5.0);
    }
    SUBCASE("model 1 from (15, 0.1)") {
        // Oracle: 30-digit evaluation of the rational map.
        const State next = nsfd_step(m1, {15.0, 0.1, 0.0}, 0.1);
        CHECK(next.x == doctest::Approx(6.59659530564869745).epsilon(1e-14));
        CHECK(next.y == doctest::Approx(0.0685483870967741935).epsilon(1e-14));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(nsfd_step(m1, {-0.1, 1.0, 0.0}, 0.1), DomainError);
        CHECK_THROWS_AS(nsfd_step(m1, {0.1, 1.0, 0.0}, 0.0), std::invalid_argument);
    }
}

TEST_CASE("ensfd_step") {
    const auto m1 = model_from_name("model1");
    SUBCASE("identity weight reproduces nsfd bitwise") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> coord(0.0, 20.0);
        const auto w = StepWeight::identity();
        for (int i = 0; i < 200; ++i) {
            const State s{coord(rng), coord(rng), 0.0};
            const double h = std::pow(10.0, -3.0 + 5.0 * i / 200.0);
            const State a = ensfd_step(m1, s, h, w);
            const State b = nsfd_step(m1, s, h);
            CHECK(a.x == b.x);
            CHECK(a.y == b.y);
        }
    }
    SUBCASE("exponential weight keeps fixed points") {
        const auto w = StepWeight::exponential(1.0);
        CHECK(w(0.1) == doctest::Approx(0.0951625819640404319).epsilon(1e-15));
        const State next = ensfd_step(m1, {1.0, 0.0, 0.0}, 0.1, w);
        CHECK(next.x == 1.0);
        CHECK(next.y == 0.0);
    }
    SUBCASE("substitution identity with exp weight") {
        const auto w = StepWeight::exponential(2.0);
        CHECK(w(0.5) == doctest::Approx(0.316060279414278839).epsilon(1e-15));
        const State a = ensfd_step(m1, {15.0, 0.1, 0.0}, 0.5, w);
        const State b = nsfd_step(m1, {15.0, 0.1, 0.0}, w(0.5));
        CHECK(a.x == b.x);
        CHECK(a.y == b.y);
        CHECK(a.t == 0.5);
    }
    SUBCASE("weight behaves like h for small steps") {
        for (double rate : {0.5, 1.0, 4.0}) {
            const auto w = StepWeight::exponential(rate);
            for (double h : {1e-3, 1e-4, 1e-5}) {
                CHECK(w(h) > 0.0);
                CHECK(std::abs(w(h) / h - 1.0) < 1e-2);
            }
        }
    }
    SUBCASE("parsing") {
        CHECK(StepWeight::parse("identity").label() == "identity");
        CHECK(StepWeight::parse("exp:2").label() == "exp:2");
        CHECK_THROWS_AS(StepWeight::parse("exp:-1"), std::invalid_argument);
        CHECK_THROWS_AS(StepWeight::parse("exp:abc"), std::invalid_argument);
        CHECK_THROWS_AS(StepWeight::parse("cubic"), std::invalid_argument);
    }
}

TEST_CASE("classical steps") {
    const auto m1 = model_from_name("model1");
    SUBCASE("equilibria are unchanged") {
        for (const State e : {State{0, 0, 0}, State{1, 0, 0}}) {
            for (auto stepper : {euler_step, rk2_step, rk4_step}) {
                const State next = stepper(m1, e, 0.3);
                CHECK(next.x == e.x);
                CHECK(next.y == e.y);
            }
        }
    }
    SUBCASE("euler leaves the quadrant from (15, 0.1)") {
        const State next = euler_step(m1, {15.0, 0.1, 0.0}, 0.1);
        CHECK(next.x == doctest::Approx(-6.01935483870967742).epsilon(1e-14));
        CHECK(next.y == doctest::Approx(0.0496774193548387097).epsilon(1e-14));
    }
    SUBCASE("zero field is the identity under rk4") {
        const State next = rk4_step(unit_system(), {2.5, 4.0, 0.0}, 0.9);
        CHECK(next.x == 2.5);
        CHECK(next.y == 4.0);
    }
    SUBCASE("non-finite stage") {
        // Just left of the pole x = -c the predation term blows up.
        CHECK_THROWS_AS(euler_step(m1, {-0.5, 1.0, 0.0}, 0.1), NonFiniteError);
    }
}

TEST_CASE("rk4 reference achieves fourth order on the logistic equation") {
    const auto sys = logistic_system();
    const double x0 = 0.1, t_end = 2.0;
    std::vector<double> errs;
    const std::vector<double> hs = {0.2, 0.1, 0.05, 0.025};
    for (double h : hs) {
        const auto traj = integrate(sys, SchemeId::rk4(), {x0, 1.0, 0.0}, h, t_end);
        errs.push_back(std::abs(traj.states.back().x - logistic_exact(x0, t_end)));
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double order = std::log(errs[i - 1] / errs[i]) / std::log(2.0);
        CHECK(order >= 3.8);
    }
}

TEST_CASE("nsfd one-step defect is O(h^2)") {
    const auto m1 = model_from_name("model1");
    const State s{0.4, 0.4, 0.0};
    const auto [fx, fy] = vector_field(m1, s);
    double previous = -1.0;
    for (double h = 1e-2; h >= 1e-5; h /= 2.0) {
        const State next = nsfd_step(m1, s, h);
        const double defect = std::max(std::abs(next.x - (s.x + h * fx)), std::abs(next.y - (s.y + h * fy)));
        if (previous > 0.0) {
            const double ratio = previous / defect;
            CHECK(ratio >= 3.5);
            CHECK(ratio <= 4.5);
        }
        previous = defect;
    }
}

TEST_CASE("integrate") {
    const auto m1 = model_from_name("model1");
    SUBCASE("ten nsfd steps stay in the quadrant and match repeated stepping") {
        const auto traj = integrate(m1, SchemeId::nsfd(), {15.0, 0.1, 0.0}, 0.1, 1.0);
        REQUIRE(traj.states.size() == 11);
        CHECK(!traj.halt_reason);
        State s{15.0, 0.1, 0.0};
        for (std::size_t k = 1; k < traj.states.size(); ++k) {
            s = nsfd_step(m1, s, 0.1);
            CHECK(traj.states[k].x == s.x);
            CHECK(traj.states[k].y == s.y);
            CHECK(traj.states[k].x >= 0.0);
            CHECK(traj.states[k].y >= 0.0);
            CHECK(traj.states[k].t == doctest::Approx(0.1 * k));
        }
    }
    SUBCASE("origin stays put under every scheme") {
        for (const auto& scheme : {SchemeId::nsfd(), SchemeId::ensfd(StepWeight::exponential(1.0)),
                                   SchemeId::euler(), SchemeId::rk2(), SchemeId::rk4()}) {
            const auto traj = integrate(m1, scheme, {0.0, 0.0, 0.0}, 0.25, 3.0);
            CHECK(traj.states.size() == 13);
            for (const auto& s : traj.states) {
                CHECK(s.x == 0.0);
                CHECK(s.y == 0.0);
            }
        }
    }
    SUBCASE("floor step count without a partial step") {
        CHECK(integrate(m1, SchemeId::nsfd(), {1, 1, 0}, 0.3, 1.0).states.size() == 4);
        CHECK(integrate(m1, SchemeId::nsfd(), {1, 1, 0}, 0.1, 0.3).states.size() == 4);
        CHECK(integrate(m1, SchemeId::nsfd(), {1, 1, 0}, 0.1, 20.0).states.size() == 201);
    }
    SUBCASE("negative classical states are kept") {
        const auto traj = integrate(m1, SchemeId::euler(), {15.0, 0.1, 0.0}, 0.1, 0.5);
        CHECK(traj.states[1].x < 0.0);
        CHECK(traj.states.size() == 6);
    }
    SUBCASE("non-finite states halt with a reason") {
        const auto m2 = model_from_name("model2");
        const auto traj = integrate(m2, SchemeId::rk2(), {0.3, 7.5, 0.0}, 4.0, 4000.0);
        REQUIRE(traj.halt_reason);
        CHECK(traj.states.size() < 10);
        for (const auto& s : traj.states) {
            CHECK(std::isfinite(s.x));
            CHECK(std::isfinite(s.y));
        }
    }
    SUBCASE("argument checks") {
        CHECK_THROWS_AS(integrate(m1, SchemeId::nsfd(), {1, 1, 0}, 0.1, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(integrate(m1, SchemeId::nsfd(), {1, 1, 0}, -0.1, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(integrate(m1, SchemeId{SchemeTag::ensfd, std::nullopt}, {1, 1, 0}, 0.1, 1.0),
                        std::invalid_argument);
    }
}

TEST_CASE("model 2 nsfd converges to the interior equilibrium below the critical step") {
    // |gamma| = sqrt(D_phi) ~ 0.9924 at h = 0.5, so reaching 1e-6 from distance ~0.16
    // needs ~1600 steps; t_end = 1000 gives 2000.
    const auto m2 = model_from_name("model2");
    const auto traj = integrate(m2, SchemeId::nsfd(), {0.4, 0.4, 0.0}, 0.5, 1000.0);
    const State& last = traj.states.back();
    CHECK(std::hypot(last.x - 0.25, last.y - 0.46875) < 1e-6);
}

TEST_CASE("nsfd positivity for random states and steps") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> coord(0.0, 20.0);
    int violations = 0;
    for (const char* name : {"model1", "model2"}) {
        const auto sys = model_from_name(name);
        for (int k = -3; k <= 2; ++k) {
            const double h = std::pow(10.0, k);
            for (int i = 0; i < 500; ++i) {
                const State s0{coord(rng), coord(rng), 0.0};
                const auto traj = integrate(sys, SchemeId::nsfd(), s0, h, 20.0 * h);
                for (const auto& s : traj.states) violations += (s.x < 0.0 || s.y < 0.0) ? 1 : 0;
            }
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("trajectory csv") {
    const auto m1 = model_from_name("model1");
    const auto traj = integrate(m1, SchemeId::nsfd(), {1.0, 0.0, 0.0}, 0.5, 1.0);
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    CHECK(os.str() == "k,t,x,y\n0,0,1,0\n1,0.5,1,0\n2,1,1,0\n");

    const auto t2 = integrate(m1, SchemeId::nsfd(), {0.1, 0.2, 0.0}, 0.1, 0.1);
    std::ostringstream os2;
    write_trajectory_csv(os2, t2);
    std::istringstream in(os2.str());
    std::string header, row0, row1;
    std::getline(in, header);
    std::getline(in, row0);
    std::getline(in, row1);
    CHECK(row0 == "0,0,0.10000000000000001,0.20000000000000001");
    // Round trip at 17 significant digits is exact.
    const auto comma = row1.rfind(',');
    CHECK(std::stod(row1.substr(comma + 1)) == t2.states[1].y);
}
