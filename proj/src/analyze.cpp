#include "opetri/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "opetri/dynamics.hpp"

namespace opetri {

std::vector<std::string> validate_dataset(const Dataset& data) {
    std::vector<std::string> v;
    for (size_t i = 1; i < data.times.size(); ++i)
        if (!(data.times[i] > data.times[i - 1])) {
            v.push_back("times are not strictly increasing at row " + std::to_string(i));
            break;
        }
    for (const auto& [name, series] : data.observations)
        if (series.size() != data.times.size())
            v.push_back("series \"" + name + "\" has " + std::to_string(series.size()) +
                        " values for " + std::to_string(data.times.size()) + " times");
    return v;
}

namespace {

double reflect_into(double x, double lo, double hi) {
    if (hi <= lo) return lo;
    const double w = hi - lo;
    double y = std::fmod(x - lo, 2 * w);
    if (y < 0) y += 2 * w;
    return lo + (y <= w ? y : 2 * w - y);
}

struct NelderMead {
    std::function<double(const std::vector<double>&)> objective;
    long max_evaluations;
    double tolerance;
    unsigned seed;

    long evaluations = 0;
    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<double> best_point;
    std::vector<double> best_history;

    double eval(const std::vector<double>& x) {
        if (evaluations >= max_evaluations) return std::numeric_limits<double>::infinity();
        ++evaluations;
        const double f = objective(x);
        if (f < best_loss) {
            best_loss = f;
            best_point = x;
            best_history.push_back(f);
        }
        return f;
    }

    bool budget_left() const { return evaluations < max_evaluations; }

    // Returns true on convergence (simplex loss spread within tolerance).
    bool run(const std::vector<double>& x0, const std::vector<double>& scale) {
        const size_t n = x0.size();
        best_point = x0;
        if (n == 0) {
            eval(x0);
            return true;
        }
        std::vector<std::vector<double>> xs;
        std::vector<double> fs;
        xs.push_back(x0);
        fs.push_back(eval(x0));
        // Deterministic LCG, used only to nudge degenerate starting vertices.
        unsigned long rng = seed * 6364136223846793005ULL + 1442695040888963407ULL;
        auto nudge = [&rng]() {
            rng = rng * 6364136223846793005ULL + 1442695040888963407ULL;
            return 1e-6 * (static_cast<double>((rng >> 33) & 0xffff) / 65535.0 + 0.5);
        };
        for (size_t i = 0; i < n; ++i) {
            auto x = x0;
            double step = scale[i];
            if (step == 0.0) step = nudge();
            x[i] += step;
            xs.push_back(x);
            fs.push_back(eval(x));
        }

        const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
        while (budget_left()) {
            std::vector<size_t> order(xs.size());
            for (size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return fs[a] < fs[b]; });
            {
                std::vector<std::vector<double>> x2;
                std::vector<double> f2;
                for (size_t i : order) {
                    x2.push_back(xs[i]);
                    f2.push_back(fs[i]);
                }
                xs.swap(x2);
                fs.swap(f2);
            }
            if (std::isfinite(fs[0]) && fs[n] - fs[0] <= tolerance) return true;

            std::vector<double> centroid(n, 0.0);
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < n; ++j) centroid[j] += xs[i][j] / static_cast<double>(n);

            auto blend = [&](const std::vector<double>& from, double coef) {
                std::vector<double> p(n);
                for (size_t j = 0; j < n; ++j) p[j] = centroid[j] + coef * (from[j] - centroid[j]);
                return p;
            };

            const auto reflected = blend(xs[n], -alpha);
            const double fr = eval(reflected);
            if (fr < fs[0]) {
                const auto expanded = blend(xs[n], -alpha * gamma);
                const double fe = eval(expanded);
                if (fe < fr) {
                    xs[n] = expanded;
                    fs[n] = fe;
                } else {
                    xs[n] = reflected;
                    fs[n] = fr;
                }
            } else if (fr < fs[n - 1]) {
                xs[n] = reflected;
                fs[n] = fr;
            } else {
                const bool outside = fr < fs[n];
                const auto contracted = outside ? blend(reflected, rho) : blend(xs[n], rho);
                const double fc = eval(contracted);
                if (fc < (outside ? fr : fs[n])) {
                    xs[n] = contracted;
                    fs[n] = fc;
                } else {
                    for (size_t i = 1; i <= n; ++i) {
                        for (size_t j = 0; j < n; ++j)
                            xs[i][j] = xs[0][j] + sigma * (xs[i][j] - xs[0][j]);
                        fs[i] = eval(xs[i]);
                    }
                }
            }
        }
        return false;
    }
};

}  // namespace

FitResult calibrate(const PetriNet& net, const std::vector<double>& u0_template,
                    const Dataset& data, const FitSpec& spec, const SolveConfig& cfg) {
    {
        auto v = validate_net(net);
        if (!v.empty()) throw Error("calibrate: invalid net: " + v.front());
        auto dv = validate_dataset(data);
        if (!dv.empty()) throw Error("calibrate: invalid dataset: " + dv.front());
    }
    if (u0_template.size() != net.species.size())
        throw Error("calibrate: initial-state template has wrong dimension");
    for (const auto& [name, series] : data.observations) {
        (void)series;
        if (!net.species_index(name))
            throw Error("calibrate: observed series \"" + name + "\" is not a species of the net");
    }
    if (!data.times.empty() &&
        (data.times.front() < cfg.t0 - 1e-9 || data.times.back() > cfg.t1 + 1e-9))
        throw Error("calibrate: observation times fall outside the solver horizon");

    // Free and fixed rates must partition the transition set.
    std::set<std::string> covered;
    for (const auto& p : spec.free_rates) {
        if (!net.transition_index(p.name))
            throw Error("calibrate: free rate \"" + p.name + "\" is not a transition");
        if (!covered.insert(p.name).second)
            throw Error("calibrate: rate \"" + p.name + "\" listed twice");
        if (p.lower < 0 || p.upper < p.lower)
            throw Error("calibrate: bounds for \"" + p.name + "\" are not ordered (0 <= lo <= hi)");
    }
    for (const auto& [name, value] : spec.fixed_rates) {
        (void)value;
        if (!net.transition_index(name))
            throw Error("calibrate: fixed rate \"" + name + "\" is not a transition");
        if (!covered.insert(name).second)
            throw Error("calibrate: rate \"" + name + "\" listed twice");
    }
    for (const auto& t : net.transitions)
        if (!covered.count(t.name))
            throw Error("calibrate: transition \"" + t.name + "\" is neither free nor fixed");
    for (const auto& p : spec.free_initial)
        if (!net.species_index(p.name))
            throw Error("calibrate: free initial entry \"" + p.name + "\" is not a species");

    const size_t n_rate = spec.free_rates.size();
    const size_t n_dim = n_rate + spec.free_initial.size();

    auto bounded = [&](const std::vector<double>& x) {
        std::vector<double> b(x.size());
        for (size_t i = 0; i < n_rate; ++i)
            b[i] = reflect_into(x[i], spec.free_rates[i].lower, spec.free_rates[i].upper);
        for (size_t i = n_rate; i < x.size(); ++i)
            b[i] = reflect_into(x[i], spec.free_initial[i - n_rate].lower,
                                spec.free_initial[i - n_rate].upper);
        return b;
    };

    long sim_failures = 0;
    auto objective = [&](const std::vector<double>& raw) -> double {
        const auto x = bounded(raw);
        PetriNet candidate = net;
        for (auto& t : candidate.transitions) {
            if (auto it = spec.fixed_rates.find(t.name); it != spec.fixed_rates.end())
                t.rate = it->second;
        }
        for (size_t i = 0; i < n_rate; ++i)
            candidate.transitions[static_cast<size_t>(
                                      *candidate.transition_index(spec.free_rates[i].name))]
                .rate = x[i];
        std::vector<double> u0 = u0_template;
        for (size_t i = 0; i < spec.free_initial.size(); ++i)
            u0[static_cast<size_t>(*net.species_index(spec.free_initial[i].name))] = x[n_rate + i];

        Trajectory traj;
        try {
            traj = solve_ode(mass_action(candidate), u0, cfg);
        } catch (const SolveError&) {
            ++sim_failures;
            return std::numeric_limits<double>::infinity();
        }
        double sse = 0.0;
        for (const auto& [name, series] : data.observations) {
            const size_t s = static_cast<size_t>(*net.species_index(name));
            for (size_t k = 0; k < data.times.size(); ++k) {
                if (std::isnan(series[k])) continue;
                const double model = traj.at(data.times[k])[s];
                const double r = model - series[k];
                sse += r * r;
            }
        }
        return sse;
    };

    NelderMead nm;
    nm.objective = objective;
    nm.max_evaluations = spec.max_evaluations;
    nm.tolerance = spec.tolerance;
    nm.seed = spec.seed;

    std::vector<double> x0, scale;
    for (const auto& p : spec.free_rates) {
        x0.push_back(p.initial);
        scale.push_back(0.05 * (p.upper - p.lower));
    }
    for (const auto& p : spec.free_initial) {
        x0.push_back(p.initial);
        scale.push_back(0.05 * (p.upper - p.lower));
    }
    const bool converged = nm.run(x0, scale);

    FitResult result;
    result.converged = converged;
    result.evaluations = nm.evaluations;
    result.loss = nm.best_loss;
    result.simulation_failures = sim_failures;
    result.best_history = nm.best_history;
    const auto best = n_dim ? bounded(nm.best_point) : std::vector<double>{};
    for (const auto& t : net.transitions) result.rates[t.name] = t.rate;
    for (const auto& [name, value] : spec.fixed_rates) result.rates[name] = value;
    for (size_t i = 0; i < n_rate; ++i) result.rates[spec.free_rates[i].name] = best[i];
    for (size_t s = 0; s < net.species.size(); ++s)
        result.initial_state[net.species[s].name] = u0_template[s];
    for (size_t i = 0; i < spec.free_initial.size(); ++i)
        result.initial_state[spec.free_initial[i].name] = best[n_rate + i];
    return result;
}

double outcome(const Trajectory& traj, const OutcomeSpec& spec) {
    if (spec.species.empty()) throw Error("outcome: species subset is empty");
    if (!(spec.t1 > spec.t0)) throw Error("outcome: t1 must exceed t0");
    std::vector<size_t> idx;
    for (const auto& name : spec.species) {
        auto it = std::find(traj.var_names.begin(), traj.var_names.end(), name);
        if (it == traj.var_names.end())
            throw Error("outcome: \"" + name + "\" is not a trajectory variable");
        idx.push_back(static_cast<size_t>(it - traj.var_names.begin()));
    }
    auto total = [&](const std::vector<double>& state) {
        double sum = 0.0;
        for (size_t i : idx) sum += state[i];
        return sum;
    };

    // Trapezoid over saved points, with interpolated values at the clipped
    // endpoints of the window.
    double t_prev = spec.t0;
    double g_prev = total(traj.at(spec.t0));
    double integral = 0.0;
    for (size_t k = 0; k < traj.times.size(); ++k) {
        const double t = traj.times[k];
        if (t <= spec.t0) continue;
        if (t >= spec.t1) break;
        const double g = total(traj.states[k]);
        integral += 0.5 * (g_prev + g) * (t - t_prev);
        t_prev = t;
        g_prev = g;
    }
    const double g_end = total(traj.at(spec.t1));
    integral += 0.5 * (g_prev + g_end) * (spec.t1 - t_prev);
    return integral;
}

std::map<std::string, double> sensitivity(const PetriNet& net,
                                          const std::map<std::string, double>& rates,
                                          const std::vector<double>& u0, const OutcomeSpec& ospec,
                                          const SolveConfig& cfg, double h) {
    if (!(h > 0)) throw Error("sensitivity: step must be positive");
    for (const auto& [name, value] : rates) {
        (void)value;
        if (!net.transition_index(name))
            throw Error("sensitivity: rate \"" + name + "\" is not a transition");
    }
    auto run = [&](const PetriNet& candidate) {
        return outcome(solve_ode(mass_action(candidate), u0, cfg), ospec);
    };
    auto with_rate = [&](const std::string& name, double value) {
        PetriNet candidate = net;
        for (auto& t : candidate.transitions) {
            if (auto it = rates.find(t.name); it != rates.end()) t.rate = it->second;
            if (t.name == name) t.rate = value;
        }
        return candidate;
    };

    std::map<std::string, double> out;
    for (const auto& t : net.transitions) {
        double beta = t.rate;
        if (auto it = rates.find(t.name); it != rates.end()) beta = it->second;
        // Relative step; absolute floor at zero, where the minus side sits
        // on the boundary and the stencil degrades to a forward difference.
        const double delta = beta > 0 ? h * beta : h;
        const double rate_plus = beta + delta;
        const double rate_minus = std::max(0.0, beta - delta);
        const double plus = run(with_rate(t.name, rate_plus));
        const double minus = run(with_rate(t.name, rate_minus));
        out[t.name] = (plus - minus) / (rate_plus - rate_minus);
    }
    return out;
}

namespace {

std::string blend_hex(double intensity, bool positive) {
    // White at 0 intensity towards saturated red (positive) or blue.
    intensity = std::clamp(intensity, 0.0, 1.0);
    const int other = static_cast<int>(std::lround(255.0 * (1.0 - 0.85 * intensity)));
    char buf[8];
    if (positive)
        std::snprintf(buf, sizeof(buf), "#ff%02x%02x", other, other);
    else
        std::snprintf(buf, sizeof(buf), "#%02x%02xff", other, other);
    return buf;
}

}  // namespace

std::string sensitivity_heatmap(const PetriNet& net, const std::map<std::string, double>& sens) {
    for (const auto& [name, value] : sens) {
        (void)value;
        if (!net.transition_index(name))
            throw Error("sensitivity_heatmap: \"" + name + "\" is not a transition of the net");
    }
    double max_mag = 0.0, min_nonzero = std::numeric_limits<double>::infinity();
    for (const auto& [name, value] : sens) {
        (void)name;
        const double m = std::fabs(value);
        max_mag = std::max(max_mag, m);
        if (m > 0) min_nonzero = std::min(min_nonzero, m);
    }
    const bool log_scale =
        max_mag > 0 && std::isfinite(min_nonzero) && max_mag / min_nonzero >= 1e3;

    DotOptions opts;
    opts.graph_name = "sensitivity";
    opts.comments.push_back("sensitivity heatmap: red = positive, blue = negative, white = zero");
    if (log_scale) {
        std::ostringstream c;
        c << "log scale: white at |value| = " << min_nonzero << ", full color at |value| = "
          << max_mag;
        opts.comments.push_back(c.str());
    } else {
        std::ostringstream c;
        c << "linear scale: full color at |value| = " << max_mag;
        opts.comments.push_back(c.str());
    }
    for (const auto& [name, value] : sens) {
        double intensity = 0.0;
        const double m = std::fabs(value);
        if (max_mag > 0 && m > 0) {
            if (log_scale) {
                const double span = std::log10(max_mag) - std::log10(min_nonzero);
                intensity = span > 0 ? (std::log10(m) - std::log10(min_nonzero)) / span : 1.0;
            } else {
                intensity = m / max_mag;
            }
        }
        opts.transition_fill[name] = blend_hex(intensity, value > 0);
    }
    return to_dot(net, opts);
}

}  // namespace opetri
