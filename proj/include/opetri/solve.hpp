#pragma once

#include <string>
#include <vector>

#include "opetri/dynamics.hpp"

namespace opetri {

struct SolveError : Error {
    using Error::Error;
};

enum class Method { rk4, rk45 };

Method method_from_string(const std::string& s);
std::string method_to_string(Method m);

struct SolveConfig {
    double t0 = 0.0;
    double t1 = 1.0;
    /// Fixed step for rk4 and the DDE stepper; initial step for rk45.
    double dt = 0.01;
    Method method = Method::rk45;
    double abs_tol = 1e-9;
    double rel_tol = 1e-7;
    long max_steps = 10'000'000;
    /// Keep every n-th accepted step (the endpoints are always kept).
    int save_every = 1;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<std::string> var_names;

    /// State at time t by linear interpolation between saved points.
    std::vector<double> at(double t) const;

    /// CSV with header "t,var1,var2,..." and full-precision values.
    std::string to_csv() const;
};

/// Integrates an ODE field from t0 to t1. rk4 takes fixed steps of dt
/// (shortening the last step to land on t1 exactly); rk45 is an embedded
/// Dormand-Prince pair with PI step-size control against abs_tol/rel_tol.
Trajectory solve_ode(const VectorField& f, const std::vector<double>& u0, const SolveConfig& cfg);

/// Integrates a fixed-delay field by the method of steps with RK4
/// substepping. The step is reduced automatically until it divides every
/// positive delay; history lookups use cubic Hermite interpolation over
/// the stored dense output and fall back to `history` for times <= t0.
/// Memory grows as O(steps * dim) because every substep is retained.
Trajectory solve_dde(const VectorField& f, const std::vector<double>& u0, const HistoryFn& history,
                     const SolveConfig& cfg);

}  // namespace opetri
