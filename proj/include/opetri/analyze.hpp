#pragma once

#include <map>
#include <string>
#include <vector>

#include "opetri/petri.hpp"
#include "opetri/solve.hpp"

namespace opetri {

/// Observed time series keyed by variable name. Missing values are NaN and
/// are skipped by the loss; every series is aligned with `times`.
struct Dataset {
    std::vector<double> times;
    std::map<std::string, std::vector<double>> observations;
};

std::vector<std::string> validate_dataset(const Dataset& data);

struct FreeParam {
    std::string name;
    double initial = 0.0;
    double lower = 0.0;
    double upper = 1.0;
};

/// What to fit: free and fixed transition rates must be disjoint and
/// together cover every transition of the net; free initial-state entries
/// override the supplied template. Bounds are enforced by reflecting
/// candidates back into the box.
struct FitSpec {
    std::vector<FreeParam> free_rates;
    std::map<std::string, double> fixed_rates;
    std::vector<FreeParam> free_initial;
    long max_evaluations = 2000;
    double tolerance = 1e-10;
    /// Perturbs degenerate initial simplex vertices only; everything else
    /// about the optimizer is deterministic.
    unsigned seed = 0;
};

struct FitResult {
    std::map<std::string, double> rates;
    std::map<std::string, double> initial_state;
    double loss = 0.0;
    long evaluations = 0;
    bool converged = false;
    long simulation_failures = 0;
    /// Best loss after each evaluation that improved it; non-increasing.
    std::vector<double> best_history;
};

/// Least-squares calibration of mass-action rates (and optionally initial
/// states) against a dataset, by bounded Nelder-Mead. The loss is the sum
/// of squared residuals between the observations and the simulated
/// trajectory linearly interpolated at the observation times. Candidates
/// whose simulation fails score +infinity and are counted.
FitResult calibrate(const PetriNet& net, const std::vector<double>& u0_template,
                    const Dataset& data, const FitSpec& spec, const SolveConfig& cfg);

/// An outcome functional: the time integral (trapezoidal, over the saved
/// trajectory) of the sum of the selected species between t0 and t1.
struct OutcomeSpec {
    std::vector<std::string> species;
    double t0 = 0.0;
    double t1 = 1.0;
};

double outcome(const Trajectory& traj, const OutcomeSpec& spec);

/// dOutcome/dRate for every transition, by central finite differences with
/// relative step h (absolute step h for rates that are exactly zero).
std::map<std::string, double> sensitivity(const PetriNet& net,
                                          const std::map<std::string, double>& rates,
                                          const std::vector<double>& u0, const OutcomeSpec& ospec,
                                          const SolveConfig& cfg, double h = 1e-4);

/// DOT heatmap of the net with transitions shaded on a diverging scale:
/// red for positive sensitivities, blue for negative, white for zero.
/// Intensity is |value| / max|value|, switching to a log scale when the
/// nonzero magnitudes span at least three decades. A legend is embedded as
/// comments.
std::string sensitivity_heatmap(const PetriNet& net, const std::map<std::string, double>& sens);

}  // namespace opetri
