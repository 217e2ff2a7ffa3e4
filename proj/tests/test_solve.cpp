#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "opetri/fixtures.hpp"
#include "opetri/solve.hpp"
#include "test_util.hpp"

using namespace opetri;
using namespace testutil;

namespace {

VectorField decay_field() {
    VectorField f;
    f.dim = 1;
    f.var_names = {"u"};
    f.eval = [](double, std::span<const double> u, const HistoryFn&, std::span<double> du) {
        du[0] = -u[0];
    };
    return f;
}

SolveConfig config(Method m, double t1, double dt) {
    SolveConfig cfg;
    cfg.t0 = 0.0;
    cfg.t1 = t1;
    cfg.dt = dt;
    cfg.method = m;
    return cfg;
}

double max_decay_error(const Trajectory& traj) {
    double worst = 0.0;
    for (size_t k = 0; k < traj.times.size(); ++k)
        worst = std::max(worst, std::fabs(traj.states[k][0] - std::exp(-traj.times[k])));
    return worst;
}

}  // namespace

TEST_CASE("a zero field yields a constant trajectory") {
    VectorField f;
    f.dim = 3;
    f.var_names = {"a", "b", "c"};
    f.eval = [](double, std::span<const double>, const HistoryFn&, std::span<double> du) {
        std::fill(du.begin(), du.end(), 0.0);
    };
    for (Method m : {Method::rk4, Method::rk45}) {
        const Trajectory traj = solve_ode(f, {1.0, 2.0, 3.0}, config(m, 7.0, 0.25));
        CHECK(traj.times.front() == 0.0);
        CHECK(traj.times.back() == 7.0);
        for (const auto& state : traj.states) {
            CHECK(state[0] == 1.0);
            CHECK(state[1] == 2.0);
            CHECK(state[2] == 3.0);
        }
    }
}

TEST_CASE("adaptive decay reaches e^-1 within 1e-6") {
    SolveConfig cfg = config(Method::rk45, 1.0, 0.1);
    cfg.abs_tol = 1e-9;
    cfg.rel_tol = 1e-9;
    const Trajectory traj = solve_ode(decay_field(), {1.0}, cfg);
    CHECK(traj.times.back() == 1.0);
    CHECK(std::fabs(traj.states.back()[0] - std::exp(-1.0)) < 1e-6);
}

TEST_CASE("adaptive error stays within 100x the relative tolerance") {
    for (double rel : {1e-5, 1e-7, 1e-9}) {
        SolveConfig cfg = config(Method::rk45, 1.0, 0.1);
        cfg.abs_tol = rel;
        cfg.rel_tol = rel;
        const Trajectory traj = solve_ode(decay_field(), {1.0}, cfg);
        CHECK(max_decay_error(traj) <= 100.0 * rel);
    }
}

TEST_CASE("rk4 shows fourth-order error reduction") {
    const double e1 = max_decay_error(solve_ode(decay_field(), {1.0}, config(Method::rk4, 1.0, 0.1)));
    const double e2 =
        max_decay_error(solve_ode(decay_field(), {1.0}, config(Method::rk4, 1.0, 0.05)));
    const double factor = e1 / e2;
    CHECK(factor >= 12.0);
    CHECK(factor <= 20.0);
}

TEST_CASE("SIR mass-action totals stay constant along the trajectory") {
    const VectorField f = mass_action(fixtures::sir());
    SolveConfig cfg = config(Method::rk45, 100.0, 0.1);
    cfg.abs_tol = 1e-10;
    cfg.rel_tol = 1e-8;
    const Trajectory traj = solve_ode(f, {0.99, 0.01, 0.0}, cfg);
    for (const auto& state : traj.states) {
        const double total = state[0] + state[1] + state[2];
        CHECK(std::fabs(total - 1.0) <= 1e-9);
    }
}

TEST_CASE("trajectories are deterministic given the same config") {
    const VectorField f = mass_action(fixtures::sir());
    const Trajectory a = solve_ode(f, {0.99, 0.01, 0.0}, config(Method::rk45, 40.0, 0.1));
    const Trajectory b = solve_ode(f, {0.99, 0.01, 0.0}, config(Method::rk45, 40.0, 0.1));
    CHECK(a.to_csv() == b.to_csv());
}

TEST_CASE("solver error paths") {
    SUBCASE("max_steps exceeded") {
        SolveConfig cfg = config(Method::rk4, 10.0, 1e-6);
        cfg.max_steps = 100;
        CHECK_THROWS_WITH_AS((void)solve_ode(decay_field(), {1.0}, cfg),
                             doctest::Contains("max_steps"), SolveError);
    }
    SUBCASE("non-finite derivative is reported with its time") {
        VectorField f;
        f.dim = 1;
        f.var_names = {"u"};
        f.eval = [](double t, std::span<const double>, const HistoryFn&, std::span<double> du) {
            du[0] = t < 0.5 ? 1.0 : std::numeric_limits<double>::quiet_NaN();
        };
        CHECK_THROWS_WITH_AS((void)solve_ode(f, {0.0}, config(Method::rk45, 1.0, 0.1)),
                             doctest::Contains("non-finite"), SolveError);
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS((void)solve_ode(decay_field(), {1.0, 2.0}, config(Method::rk4, 1.0, 0.1)),
                        SolveError);
    }
    SUBCASE("delayed field refused by solve_ode") {
        VectorField f = decay_field();
        f.delays = {1.0};
        CHECK_THROWS_AS((void)solve_ode(f, {1.0}, config(Method::rk4, 1.0, 0.1)), SolveError);
    }
    SUBCASE("bad config") {
        SolveConfig cfg = config(Method::rk4, -1.0, 0.1);
        CHECK_THROWS_AS((void)solve_ode(decay_field(), {1.0}, cfg), SolveError);
    }
}

TEST_CASE("method of steps: u'(t) = -u(t-1) with unit history hits zero at t=1") {
    VectorField f;
    f.dim = 1;
    f.var_names = {"u"};
    f.delays = {1.0};
    f.delay_capable = true;
    f.eval = [](double t, std::span<const double>, const HistoryFn& history, std::span<double> du) {
        std::vector<double> lag(1);
        history(t - 1.0, lag);
        du[0] = -lag[0];
    };
    const HistoryFn ones = [](double, std::span<double> out) { out[0] = 1.0; };
    const Trajectory traj = solve_dde(f, {1.0}, ones, config(Method::rk4, 1.0, 0.05));
    CHECK(std::fabs(traj.states.back()[0] - 0.0) <= 1e-8);
    // On [0, 1] the solution is the line 1 - t.
    for (size_t k = 0; k < traj.times.size(); ++k)
        CHECK(std::fabs(traj.states[k][0] - (1.0 - traj.times[k])) <= 1e-8);
}

TEST_CASE("a coerced ODE solved as a DDE matches the ODE solver") {
    const VectorField f = mass_action(fixtures::sir());
    VectorField coerced = f;
    coerced.delay_capable = true;
    const HistoryFn constant = [](double, std::span<double> out) {
        out[0] = 0.99;
        out[1] = 0.01;
        out[2] = 0.0;
    };
    const Trajectory ode = solve_ode(f, {0.99, 0.01, 0.0}, config(Method::rk4, 20.0, 0.05));
    const Trajectory dde = solve_dde(coerced, {0.99, 0.01, 0.0}, constant,
                                     config(Method::rk4, 20.0, 0.05));
    REQUIRE(ode.times.size() == dde.times.size());
    for (size_t k = 0; k < ode.times.size(); ++k)
        for (size_t i = 0; i < 3; ++i)
            CHECK(std::fabs(ode.states[k][i] - dde.states[k][i]) <= 1e-8);
}

TEST_CASE("zero-delay growth: u'(t) = u(t-0) reaches e at t=1") {
    VectorField f;
    f.dim = 1;
    f.var_names = {"u"};
    f.delays = {0.0};
    f.delay_capable = true;
    f.eval = [](double t, std::span<const double>, const HistoryFn& history, std::span<double> du) {
        std::vector<double> now(1);
        history(t, now);
        du[0] = now[0];
    };
    const HistoryFn ones = [](double, std::span<double> out) { out[0] = 1.0; };
    const Trajectory traj = solve_dde(f, {1.0}, ones, config(Method::rk4, 1.0, 0.01));
    CHECK(std::fabs(traj.states.back()[0] - std::exp(1.0)) <= 1e-6);
}

TEST_CASE("the DDE step is reduced to divide every positive delay") {
    VectorField f;
    f.dim = 1;
    f.var_names = {"u"};
    f.delays = {0.3, 1.0};
    f.delay_capable = true;
    f.eval = [](double t, std::span<const double>, const HistoryFn& history, std::span<double> du) {
        std::vector<double> l1(1), l2(1);
        history(t - 0.3, l1);
        history(t - 1.0, l2);
        du[0] = -0.5 * (l1[0] + l2[0]);
    };
    const HistoryFn ones = [](double, std::span<double> out) { out[0] = 1.0; };
    // gcd(0.3, 1.0) = 0.1, so a requested 0.4 step must shrink to divide both.
    const Trajectory traj = solve_dde(f, {1.0}, ones, config(Method::rk4, 2.0, 0.4));
    CHECK(traj.times.back() == 2.0);
    CHECK(std::isfinite(traj.states.back()[0]));
}

TEST_CASE("incommensurable delays are rejected") {
    VectorField f;
    f.dim = 1;
    f.var_names = {"u"};
    f.delays = {1.0, std::sqrt(2.0)};
    f.delay_capable = true;
    f.eval = [](double, std::span<const double> u, const HistoryFn&, std::span<double> du) {
        du[0] = -u[0];
    };
    const HistoryFn ones = [](double, std::span<double> out) { out[0] = 1.0; };
    CHECK_THROWS_WITH_AS((void)solve_dde(f, {1.0}, ones, config(Method::rk4, 2.0, 0.5)),
                         doctest::Contains("incommensurable"), SolveError);
}

TEST_CASE("DDE stepping copes with non-representable delays over long horizons") {
    // 0.3 is not representable in binary, so tau/n lands within the lookup
    // tolerance rather than exactly; a long integration must still work.
    VectorField f;
    f.dim = 1;
    f.var_names = {"u"};
    f.delays = {0.3};
    f.delay_capable = true;
    f.eval = [](double t, std::span<const double> u, const HistoryFn& history,
                std::span<double> du) {
        std::vector<double> lag(1);
        history(t - 0.3, lag);
        du[0] = -0.5 * lag[0] - 0.1 * u[0];
    };
    const HistoryFn ones = [](double, std::span<double> out) { out[0] = 1.0; };
    const Trajectory traj = solve_dde(f, {1.0}, ones, config(Method::rk4, 10.0, 0.07));
    CHECK(traj.times.back() == 10.0);
    for (const auto& s : traj.states) CHECK(std::isfinite(s[0]));
}

TEST_CASE("a delay below the minimum step is rejected") {
    VectorField f;
    f.dim = 1;
    f.var_names = {"u"};
    f.delays = {1e-15};
    f.delay_capable = true;
    f.eval = [](double, std::span<const double> u, const HistoryFn&, std::span<double> du) {
        du[0] = -u[0];
    };
    const HistoryFn ones = [](double, std::span<double> out) { out[0] = 1.0; };
    CHECK_THROWS_WITH_AS((void)solve_dde(f, {1.0}, ones, config(Method::rk4, 1.0, 0.1)),
                         doctest::Contains("minimum step"), SolveError);
}

TEST_CASE("save_every thins the saved points but keeps the endpoints") {
    const VectorField f = decay_field();
    SolveConfig cfg = config(Method::rk4, 1.0, 0.1);
    cfg.save_every = 4;
    const Trajectory traj = solve_ode(f, {1.0}, cfg);
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == 1.0);
    CHECK(traj.times.size() < 11);
}

TEST_CASE("trajectory interpolation and CSV output") {
    const VectorField f = decay_field();
    const Trajectory traj = solve_ode(f, {1.0}, config(Method::rk4, 1.0, 0.1));
    const auto mid = traj.at(0.55);
    CHECK(std::fabs(mid[0] - std::exp(-0.55)) < 1e-3);
    CHECK_THROWS_AS((void)traj.at(2.0), Error);
    const std::string csv = traj.to_csv();
    CHECK(csv.rfind("t,u\n", 0) == 0);
    CHECK(csv.find("0.1") != std::string::npos);
}
