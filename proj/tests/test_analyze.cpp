#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "opetri/analyze.hpp"
#include "opetri/dynamics.hpp"
#include "opetri/fixtures.hpp"
#include "test_util.hpp"

using namespace opetri;
using namespace testutil;

namespace {

SolveConfig sim_config(double t1) {
    SolveConfig cfg;
    cfg.t0 = 0.0;
    cfg.t1 = t1;
    cfg.dt = 0.1;
    cfg.method = Method::rk45;
    cfg.abs_tol = 1e-10;
    cfg.rel_tol = 1e-8;
    return cfg;
}

// Synthetic observations produced by this same simulator with the same
// config the fit will use, so the loss at the true parameters is exactly
// zero (self-consistency oracle).
Dataset synthetic_data(const PetriNet& net, const std::vector<double>& u0, double t1, int points) {
    const Trajectory traj = solve_ode(mass_action(net), u0, sim_config(t1));
    Dataset data;
    for (int k = 0; k <= points; ++k) data.times.push_back(t1 * k / points);
    for (const auto& s : net.species) data.observations[s.name] = {};
    for (double t : data.times) {
        const auto u = traj.at(t);
        for (size_t s = 0; s < net.species.size(); ++s)
            data.observations[net.species[s].name].push_back(u[s]);
    }
    return data;
}

FitSpec sir_fit_spec(double guess_inf, double guess_rec) {
    FitSpec spec;
    spec.free_rates = {{"infection", guess_inf, 0.0, 2.0}, {"recovery", guess_rec, 0.0, 2.0}};
    spec.max_evaluations = 2000;
    spec.tolerance = 1e-14;
    return spec;
}

}  // namespace

TEST_CASE("dataset validation catches ragged series and bad times") {
    Dataset data;
    data.times = {0.0, 1.0, 1.0};
    data.observations["S"] = {1.0, 2.0};
    const auto v = validate_dataset(data);
    CHECK(v.size() == 2);
}

TEST_CASE("calibration recovers SIR rates from noiseless synthetic data") {
    const PetriNet net = fixtures::sir();  // true rates 0.3 and 0.1
    const std::vector<double> u0 = {0.99, 0.01, 0.0};
    const Dataset data = synthetic_data(net, u0, 50.0, 50);

    const FitResult fit = calibrate(net, u0, data, sir_fit_spec(0.5, 0.5), sim_config(50.0));
    CHECK(fit.evaluations <= 2000);
    CHECK(std::fabs(fit.rates.at("infection") - 0.3) / 0.3 < 0.05);
    CHECK(std::fabs(fit.rates.at("recovery") - 0.1) / 0.1 < 0.05);
    CHECK(fit.simulation_failures == 0);

    // Best-so-far losses never increase.
    for (size_t i = 1; i < fit.best_history.size(); ++i)
        CHECK(fit.best_history[i] <= fit.best_history[i - 1]);
}

TEST_CASE("starting at the true parameters scores (near) zero at evaluation one") {
    const PetriNet net = fixtures::sir();
    const std::vector<double> u0 = {0.99, 0.01, 0.0};
    const Dataset data = synthetic_data(net, u0, 30.0, 30);
    FitSpec spec = sir_fit_spec(0.3, 0.1);
    spec.max_evaluations = 1;
    const FitResult fit = calibrate(net, u0, data, spec, sim_config(30.0));
    CHECK(fit.evaluations == 1);
    CHECK(fit.loss < 1e-8);
}

TEST_CASE("fixed rates come back exactly as fixed") {
    const PetriNet net = fixtures::sviivr();
    std::vector<double> u0 = {0.94, 0.01, 0.0, 0.0, 0.05};
    const Dataset data = synthetic_data(net, u0, 30.0, 30);
    FitSpec spec;
    spec.fixed_rates["gamma_U"] = 1.0 / 14.0;
    spec.fixed_rates["gamma_V"] = 1.0 / 14.0;
    spec.free_rates = {{"beta_UU", 0.2, 0.0, 1.0},
                       {"beta_VV", 0.1, 0.0, 1.0},
                       {"beta_UV", 0.1, 0.0, 1.0},
                       {"beta_VU", 0.1, 0.0, 1.0},
                       {"nu", 0.05, 0.0, 1.0}};
    spec.max_evaluations = 300;
    const FitResult fit = calibrate(net, u0, data, spec, sim_config(30.0));
    CHECK(fit.rates.at("gamma_U") == 1.0 / 14.0);
    CHECK(fit.rates.at("gamma_V") == 1.0 / 14.0);
}

TEST_CASE("free initial-state entries are fitted within bounds") {
    const PetriNet net = fixtures::sir();
    const std::vector<double> truth_u0 = {0.99, 0.01, 0.0};
    const Dataset data = synthetic_data(net, truth_u0, 40.0, 40);
    FitSpec spec;
    spec.free_rates = {{"infection", 0.3, 0.3, 0.3}, {"recovery", 0.1, 0.1, 0.1}};
    spec.free_initial = {{"I", 0.2, 0.0, 0.5}};
    spec.max_evaluations = 400;
    const std::vector<double> template_u0 = {0.99, 0.2, 0.0};
    const FitResult fit = calibrate(net, template_u0, data, spec, sim_config(40.0));
    CHECK(std::fabs(fit.initial_state.at("I") - 0.01) < 0.005);
}

TEST_CASE("missing observations are skipped, not imputed") {
    const PetriNet net = fixtures::sir();
    const std::vector<double> u0 = {0.99, 0.01, 0.0};
    Dataset data = synthetic_data(net, u0, 20.0, 20);
    // Blank out half the I series; the loss at truth must still be ~0.
    for (size_t k = 0; k < data.observations["I"].size(); k += 2)
        data.observations["I"][k] = std::nan("");
    FitSpec spec = sir_fit_spec(0.3, 0.1);
    spec.max_evaluations = 1;
    const FitResult fit = calibrate(net, u0, data, spec, sim_config(20.0));
    CHECK(fit.loss < 1e-8);
}

TEST_CASE("failed simulations score infinite loss and are counted") {
    const PetriNet net = fixtures::sir();
    const std::vector<double> u0 = {0.99, 0.01, 0.0};
    const Dataset data = synthetic_data(net, u0, 10.0, 10);
    SolveConfig cfg = sim_config(10.0);
    cfg.max_steps = 3;  // every candidate run aborts
    FitSpec spec = sir_fit_spec(0.5, 0.5);
    spec.max_evaluations = 20;
    const FitResult fit = calibrate(net, u0, data, spec, cfg);
    CHECK(fit.simulation_failures > 0);
    CHECK(std::isinf(fit.loss));
    CHECK(!fit.converged);
}

TEST_CASE("calibration validates its inputs") {
    const PetriNet net = fixtures::sir();
    const std::vector<double> u0 = {0.99, 0.01, 0.0};
    const Dataset data = synthetic_data(net, u0, 10.0, 10);

    FitSpec missing = sir_fit_spec(0.5, 0.5);
    missing.free_rates.pop_back();
    CHECK_THROWS_WITH_AS((void)calibrate(net, u0, data, missing, sim_config(10.0)),
                         doctest::Contains("neither free nor fixed"), Error);

    FitSpec doubled = sir_fit_spec(0.5, 0.5);
    doubled.fixed_rates["infection"] = 0.3;
    CHECK_THROWS_WITH_AS((void)calibrate(net, u0, data, doubled, sim_config(10.0)),
                         doctest::Contains("listed twice"), Error);

    Dataset stranger = data;
    stranger.observations["Zebra"] = stranger.observations["S"];
    CHECK_THROWS_WITH_AS((void)calibrate(net, u0, stranger, sir_fit_spec(0.5, 0.5), sim_config(10.0)),
                         doctest::Contains("Zebra"), Error);
}

TEST_CASE("outcome integrates a constant trajectory exactly") {
    Trajectory traj;
    traj.var_names = {"a", "b"};
    for (int k = 0; k <= 10; ++k) {
        traj.times.push_back(k);
        traj.states.push_back({2.5, 1.0});
    }
    CHECK(outcome(traj, {{"a"}, 0.0, 10.0}) == doctest::Approx(25.0).epsilon(1e-14));
    CHECK(outcome(traj, {{"a", "b"}, 2.0, 6.0}) == doctest::Approx(14.0).epsilon(1e-14));
}

TEST_CASE("outcome over all species of a conservative net is total times horizon") {
    const VectorField f = mass_action(fixtures::sir());
    const Trajectory traj = solve_ode(f, {0.99, 0.01, 0.0}, sim_config(25.0));
    const double val = outcome(traj, {{"S", "I", "R"}, 0.0, 25.0});
    CHECK(std::fabs(val - 25.0) < 1e-6);
}

TEST_CASE("outcome of a subset is positive and below the conserved bound") {
    const VectorField f = mass_action(fixtures::sir());
    const Trajectory traj = solve_ode(f, {0.99, 0.01, 0.0}, sim_config(25.0));
    const double val = outcome(traj, {{"S", "R"}, 0.0, 25.0});
    CHECK(val > 0.0);
    CHECK(val < 25.0);
}

TEST_CASE("outcome is linear in the trajectory") {
    const VectorField f = mass_action(fixtures::sir());
    Trajectory traj = solve_ode(f, {0.99, 0.01, 0.0}, sim_config(25.0));
    const double base = outcome(traj, {{"S", "R"}, 0.0, 25.0});
    for (auto& state : traj.states)
        for (auto& x : state) x *= 3.0;
    CHECK(outcome(traj, {{"S", "R"}, 0.0, 25.0}) == doctest::Approx(3.0 * base).epsilon(1e-12));
}

TEST_CASE("sensitivity signs for the SIR non-infectious outcome") {
    const PetriNet net = fixtures::sir();
    const OutcomeSpec noninf{{"S", "R"}, 0.0, 100.0};
    const auto sens =
        sensitivity(net, net.rate_map(), {0.99, 0.01, 0.0}, noninf, sim_config(100.0));
    CHECK(sens.at("infection") < 0.0);
    CHECK(sens.at("recovery") > 0.0);
}

TEST_CASE("sensitivities of a conserved outcome vanish") {
    const PetriNet net = fixtures::sir();
    const OutcomeSpec everything{{"S", "I", "R"}, 0.0, 50.0};
    const auto sens =
        sensitivity(net, net.rate_map(), {0.99, 0.01, 0.0}, everything, sim_config(50.0));
    for (const auto& [name, value] : sens) {
        (void)name;
        CHECK(std::fabs(value) <= 1e-6 * 50.0);
    }
}

TEST_CASE("half-step sensitivities agree to second order (Richardson check)") {
    const PetriNet net = fixtures::sir();
    const OutcomeSpec noninf{{"S", "R"}, 0.0, 60.0};
    // Fixed mesh so the quadrature error cancels between the +/- runs and
    // the check sees the finite-difference order alone.
    SolveConfig cfg = sim_config(60.0);
    cfg.method = Method::rk4;
    cfg.dt = 0.02;
    const auto full = sensitivity(net, net.rate_map(), {0.99, 0.01, 0.0}, noninf, cfg, 1e-4);
    const auto half = sensitivity(net, net.rate_map(), {0.99, 0.01, 0.0}, noninf, cfg, 5e-5);
    for (const auto& [name, value] : full) {
        const double other = half.at(name);
        CHECK(std::fabs(value - other) <= 1e-3 * std::max(1.0, std::fabs(value)));
    }
}

TEST_CASE("a zero rate gets the absolute step and a forward stencil") {
    PetriNet net = fixtures::sir();
    const int v = net.add_species("V");
    net.add_transition("vaccinate", 0.0, {0}, {v});
    const OutcomeSpec spec{{"S", "R"}, 0.0, 30.0};
    SolveConfig cfg = sim_config(30.0);
    cfg.method = Method::rk4;
    cfg.dt = 0.05;
    const std::vector<double> u0 = {0.99, 0.01, 0.0, 0.0};
    const double h = 1e-4;
    const auto sens = sensitivity(net, net.rate_map(), u0, spec, cfg, h);

    auto outcome_at = [&](double rate) {
        PetriNet candidate = net;
        candidate.transitions[2].rate = rate;
        return outcome(solve_ode(mass_action(candidate), u0, cfg), spec);
    };
    const double manual = (outcome_at(h) - outcome_at(0.0)) / h;
    CHECK(std::isfinite(sens.at("vaccinate")));
    CHECK(sens.at("vaccinate") == doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("a rate on an unpopulated path has zero sensitivity") {
    PetriNet net = fixtures::sir();
    const int x = net.add_species("X");
    const int y = net.add_species("Y");
    net.add_transition("idle", 0.4, {x}, {y});
    const OutcomeSpec noninf{{"S", "R"}, 0.0, 40.0};
    std::map<std::string, double> rates = net.rate_map();
    const auto sens = sensitivity(net, rates, {0.99, 0.01, 0.0, 0.0, 0.0}, noninf, sim_config(40.0));
    CHECK(std::fabs(sens.at("idle")) <= 1e-12);
}

TEST_CASE("heatmap colors encode sign and magnitude") {
    const PetriNet net = fixtures::sir();

    SUBCASE("all-zero sensitivities render white") {
        const std::string dot = sensitivity_heatmap(net, {{"infection", 0.0}, {"recovery", 0.0}});
        CHECK(dot.find("#ffffff") != std::string::npos);
        CHECK(dot.find("legend") == std::string::npos);  // legend lives in comments only
        CHECK(dot.find("red = positive") != std::string::npos);
    }
    SUBCASE("one positive and one negative get red and blue") {
        const std::string dot = sensitivity_heatmap(net, {{"infection", -2.0}, {"recovery", 1.0}});
        CHECK(dot.find("#2626ff") != std::string::npos);  // saturated blue for the extreme
        CHECK(dot.find("#ff") != std::string::npos);
    }
    SUBCASE("wide magnitude ranges switch to the log scale") {
        const std::string dot =
            sensitivity_heatmap(net, {{"infection", 1e-6}, {"recovery", 1.0}});
        CHECK(dot.find("log scale") != std::string::npos);
    }
    SUBCASE("unknown transition names are rejected") {
        CHECK_THROWS_AS((void)sensitivity_heatmap(net, {{"ghost", 1.0}}), Error);
    }
}
