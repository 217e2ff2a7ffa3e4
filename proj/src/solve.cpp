#include "opetri/solve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace opetri {

Method method_from_string(const std::string& s) {
    if (s == "rk4") return Method::rk4;
    if (s == "rk45") return Method::rk45;
    throw Error("unknown method \"" + s + "\" (expected rk4 or rk45)");
}

std::string method_to_string(Method m) { return m == Method::rk4 ? "rk4" : "rk45"; }

std::vector<double> Trajectory::at(double t) const {
    if (times.empty()) throw Error("Trajectory::at: empty trajectory");
    const double lo = times.front(), hi = times.back();
    const double tol = 1e-9 * std::max({1.0, std::fabs(lo), std::fabs(hi)});
    if (t < lo - tol || t > hi + tol)
        throw Error("Trajectory::at: time " + std::to_string(t) + " outside [" + std::to_string(lo) +
                    ", " + std::to_string(hi) + "]");
    t = std::clamp(t, lo, hi);
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return states.front();
    if (it == times.end()) return states.back();
    const size_t j = static_cast<size_t>(it - times.begin());
    const double ta = times[j - 1], tb = times[j];
    const double w = (tb > ta) ? (t - ta) / (tb - ta) : 0.0;
    std::vector<double> out(states[j].size());
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = states[j - 1][i] + w * (states[j][i] - states[j - 1][i]);
    return out;
}

namespace {

std::string fmt_full(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

std::string Trajectory::to_csv() const {
    std::ostringstream os;
    os << "t";
    for (const auto& n : var_names) os << "," << n;
    os << "\n";
    for (size_t r = 0; r < times.size(); ++r) {
        os << fmt_full(times[r]);
        for (double x : states[r]) os << "," << fmt_full(x);
        os << "\n";
    }
    return os.str();
}

namespace {

void validate_config(const SolveConfig& cfg) {
    if (!(cfg.t1 > cfg.t0)) throw SolveError("solver config: t1 must exceed t0");
    if (!(cfg.dt > 0)) throw SolveError("solver config: dt must be positive");
    if (!(cfg.abs_tol > 0) || !(cfg.rel_tol > 0))
        throw SolveError("solver config: tolerances must be positive");
    if (cfg.save_every < 1) throw SolveError("solver config: save_every must be >= 1");
}

void check_finite(std::span<const double> v, double t, const char* what) {
    for (size_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i]))
            throw SolveError(std::string("non-finite ") + what + " in component " +
                             std::to_string(i) + " at t = " + std::to_string(t));
}

const HistoryFn& no_history() {
    static const HistoryFn h = [](double, std::span<double>) {
        throw SolveError("ODE field asked for history");
    };
    return h;
}

struct Saver {
    Trajectory traj;
    int every;
    long accepted = 0;

    void first(double t, const std::vector<double>& u) {
        traj.times.push_back(t);
        traj.states.push_back(u);
    }
    void step(double t, const std::vector<double>& u, bool final) {
        ++accepted;
        if (final || accepted % every == 0) {
            traj.times.push_back(t);
            traj.states.push_back(u);
        }
    }
};

void rk4_step(const VectorField& f, const HistoryFn& history, double t, double h,
              const std::vector<double>& u, std::vector<double>& out) {
    const size_t n = u.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    f.eval(t, u, history, k1);
    for (size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * h * k1[i];
    f.eval(t + 0.5 * h, tmp, history, k2);
    for (size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * h * k2[i];
    f.eval(t + 0.5 * h, tmp, history, k3);
    for (size_t i = 0; i < n; ++i) tmp[i] = u[i] + h * k3[i];
    f.eval(t + h, tmp, history, k4);
    out.resize(n);
    for (size_t i = 0; i < n; ++i)
        out[i] = u[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

Trajectory solve_rk4(const VectorField& f, std::vector<double> u, const SolveConfig& cfg) {
    Saver saver{{{}, {}, f.var_names}, cfg.save_every};
    saver.first(cfg.t0, u);

    const double span = cfg.t1 - cfg.t0;
    const long n_full = static_cast<long>(std::floor(span / cfg.dt + 1e-9));
    const double rem = span - static_cast<double>(n_full) * cfg.dt;
    const bool partial = rem > cfg.dt * 1e-9;
    const long total = n_full + (partial ? 1 : 0);
    if (total > cfg.max_steps)
        throw SolveError("rk4 would need " + std::to_string(total) + " steps, max_steps is " +
                         std::to_string(cfg.max_steps));

    std::vector<double> next;
    for (long k = 0; k < total; ++k) {
        const bool last = (k == total - 1);
        const double t = cfg.t0 + static_cast<double>(k) * cfg.dt;
        const double h = (last && partial) ? (cfg.t1 - t) : cfg.dt;
        rk4_step(f, no_history(), t, h, u, next);
        check_finite(next, t + h, "state");
        u = next;
        saver.step(last ? cfg.t1 : cfg.t0 + static_cast<double>(k + 1) * cfg.dt, u, last);
    }
    if (total == 0) {
        // Horizon shorter than a relative tick of dt; report the endpoint.
        saver.step(cfg.t1, u, true);
    }
    return saver.traj;
}

// Dormand-Prince 5(4) coefficients.
constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784,
                 B6 = 11.0 / 84;
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200,
                 E6 = 22.0 / 525, E7 = -1.0 / 40;

Trajectory solve_rk45(const VectorField& f, std::vector<double> u, const SolveConfig& cfg) {
    Saver saver{{{}, {}, f.var_names}, cfg.save_every};
    saver.first(cfg.t0, u);

    const size_t n = u.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y5(n), err(n);
    double t = cfg.t0;
    double h = std::min(cfg.dt, cfg.t1 - cfg.t0);
    double err_old = 1e-4;
    bool last_rejected = false;
    long steps = 0;

    f.eval(t, u, no_history(), k1);
    check_finite(k1, t, "derivative");

    while (cfg.t1 - t > 1e-14 * std::max(1.0, std::fabs(cfg.t1))) {
        if (++steps > cfg.max_steps)
            throw SolveError("rk45 exceeded max_steps = " + std::to_string(cfg.max_steps) +
                             " at t = " + std::to_string(t));
        bool final = false;
        if (t + h >= cfg.t1) {
            h = cfg.t1 - t;
            final = true;
        }
        if (h < 1e-14 * std::max(1.0, std::fabs(t)))
            throw SolveError("rk45 step size underflow at t = " + std::to_string(t));

        auto stage = [&](double c, std::vector<double>& k, auto... terms) {
            auto pairs = std::initializer_list<std::pair<double, const std::vector<double>*>>{terms...};
            for (size_t i = 0; i < n; ++i) {
                double acc = 0;
                for (const auto& [a, kv] : pairs) acc += a * (*kv)[i];
                tmp[i] = u[i] + h * acc;
            }
            f.eval(t + c * h, tmp, no_history(), k);
        };
        stage(C2, k2, std::make_pair(A21, &k1));
        stage(C3, k3, std::make_pair(A31, &k1), std::make_pair(A32, &k2));
        stage(C4, k4, std::make_pair(A41, &k1), std::make_pair(A42, &k2), std::make_pair(A43, &k3));
        stage(C5, k5, std::make_pair(A51, &k1), std::make_pair(A52, &k2), std::make_pair(A53, &k3),
              std::make_pair(A54, &k4));
        stage(1.0, k6, std::make_pair(A61, &k1), std::make_pair(A62, &k2), std::make_pair(A63, &k3),
              std::make_pair(A64, &k4), std::make_pair(A65, &k5));
        for (size_t i = 0; i < n; ++i)
            y5[i] = u[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        f.eval(t + h, y5, no_history(), k7);
        check_finite(k7, t + h, "derivative");
        for (size_t i = 0; i < n; ++i)
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] +
                          E7 * k7[i]);

        double err_norm = 0;
        for (size_t i = 0; i < n; ++i) {
            const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::fabs(u[i]), std::fabs(y5[i]));
            err_norm += (err[i] / sc) * (err[i] / sc);
        }
        err_norm = n ? std::sqrt(err_norm / static_cast<double>(n)) : 0.0;

        if (err_norm <= 1.0) {
            t = final ? cfg.t1 : t + h;
            u = y5;
            check_finite(u, t, "state");
            k1 = k7;  // first-same-as-last
            saver.step(t, u, final);
            if (final) break;
            double fac = std::pow(err_norm, 0.17) / std::pow(err_old, 0.04);
            fac = std::max(0.1, std::min(5.0, fac / 0.9));
            double h_new = h / fac;
            if (last_rejected) h_new = std::min(h_new, h);
            h = h_new;
            err_old = std::max(err_norm, 1e-4);
            last_rejected = false;
        } else {
            h = h / std::min(5.0, std::pow(err_norm, 0.2) / 0.9);
            last_rejected = true;
        }
    }
    return saver.traj;
}

// Shrinks dt until it divides every positive delay (an integer number of
// steps per delay). Incommensurable delays have no such step and are
// rejected after a fixed number of refinement passes.
double dde_step_size(const std::vector<double>& delays, double dt, double horizon) {
    const double min_step = 1e-12 * std::max(1.0, std::fabs(horizon));
    for (double tau : delays) {
        if (tau < 0) throw SolveError("negative delay");
        if (tau > 0 && tau < min_step)
            throw SolveError("delay " + std::to_string(tau) + " is smaller than the minimum step " +
                             std::to_string(min_step));
    }
    double h = dt;
    for (int pass = 0; pass < 64; ++pass) {
        bool changed = false;
        for (double tau : delays) {
            if (tau <= 0) continue;
            const double ratio = tau / h;
            const double n = std::ceil(ratio - 1e-9);
            if (std::fabs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio) ||
                h > tau * (1 + 1e-12)) {
                h = tau / n;
                changed = true;
            }
        }
        if (!changed) return h;
        if (h < dt / 4096.0)
            throw SolveError(
                "delays look incommensurable: the step shrank more than 4096-fold from dt "
                "without dividing them all");
    }
    throw SolveError("delays look incommensurable: no common step near dt divides them all");
}

// Dense solution storage with cubic Hermite lookup, plus the current RK
// stage so zero-delay fields can read the state at the evaluation time.
struct DenseHistory {
    const HistoryFn* pre = nullptr;
    double t0 = 0;
    std::vector<double> ts;
    std::vector<std::vector<double>> us;
    std::vector<std::vector<double>> fs;
    double stage_t = 0;
    const std::vector<double>* stage_u = nullptr;

    void at(double q, std::span<double> out) const {
        const double front = ts.empty() ? t0 : ts.back();
        const double tol = 1e-9 * std::max({1.0, std::fabs(q), std::fabs(front)});
        if (q < t0 - tol) {
            (*pre)(q, out);
            return;
        }
        if (!ts.empty() && q <= ts.back() + tol) {
            if (ts.size() == 1) {
                for (size_t i = 0; i < out.size(); ++i) out[i] = us[0][i];
                return;
            }
            const double qc = std::clamp(q, ts.front(), ts.back());
            auto it = std::upper_bound(ts.begin(), ts.end(), qc);
            if (it == ts.begin()) ++it;
            if (it == ts.end()) --it;
            const size_t j = static_cast<size_t>(it - ts.begin());
            const double ta = ts[j - 1], tb = ts[j];
            const double hseg = tb - ta;
            const double th = hseg > 0 ? (qc - ta) / hseg : 0.0;
            const double h00 = (1 + 2 * th) * (1 - th) * (1 - th);
            const double h10 = th * (1 - th) * (1 - th);
            const double h01 = th * th * (3 - 2 * th);
            const double h11 = th * th * (th - 1);
            for (size_t i = 0; i < out.size(); ++i)
                out[i] = h00 * us[j - 1][i] + h10 * hseg * fs[j - 1][i] + h01 * us[j][i] +
                         h11 * hseg * fs[j][i];
            return;
        }
        if (stage_u && std::fabs(q - stage_t) <= tol) {
            for (size_t i = 0; i < out.size(); ++i) out[i] = (*stage_u)[i];
            return;
        }
        throw SolveError("history lookup at t = " + std::to_string(q) +
                         " is ahead of the integration front");
    }
};

Trajectory solve_dde_impl(const VectorField& f, std::vector<double> u, const HistoryFn& history,
                          const SolveConfig& cfg) {
    const size_t n = u.size();
    const double h = dde_step_size(f.delays, cfg.dt, cfg.t1 - cfg.t0);

    DenseHistory dense;
    dense.pre = &history;
    dense.t0 = cfg.t0;
    HistoryFn lookup = [&dense](double q, std::span<double> out) { dense.at(q, out); };

    auto eval = [&](double t, const std::vector<double>& state, std::vector<double>& du) {
        dense.stage_t = t;
        dense.stage_u = &state;
        f.eval(t, state, lookup, du);
        dense.stage_u = nullptr;
        check_finite(du, t, "derivative");
    };

    Saver saver{{{}, {}, f.var_names}, cfg.save_every};
    saver.first(cfg.t0, u);

    std::vector<double> du(n);
    eval(cfg.t0, u, du);
    dense.ts.push_back(cfg.t0);
    dense.us.push_back(u);
    dense.fs.push_back(du);

    const double span = cfg.t1 - cfg.t0;
    const long n_full = static_cast<long>(std::floor(span / h + 1e-9));
    const double rem = span - static_cast<double>(n_full) * h;
    const bool partial = rem > h * 1e-9;
    const long total = n_full + (partial ? 1 : 0);
    if (total > cfg.max_steps)
        throw SolveError("dde solve would need " + std::to_string(total) + " steps, max_steps is " +
                         std::to_string(cfg.max_steps));

    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n), next(n);
    for (long k = 0; k < total; ++k) {
        const bool last = (k == total - 1);
        const double t = cfg.t0 + static_cast<double>(k) * h;
        const double hs = (last && partial) ? (cfg.t1 - t) : h;
        const double t_next = last ? cfg.t1 : cfg.t0 + static_cast<double>(k + 1) * h;

        eval(t, u, k1);
        for (size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * hs * k1[i];
        eval(t + 0.5 * hs, tmp, k2);
        for (size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * hs * k2[i];
        eval(t + 0.5 * hs, tmp, k3);
        for (size_t i = 0; i < n; ++i) tmp[i] = u[i] + hs * k3[i];
        eval(t + hs, tmp, k4);
        for (size_t i = 0; i < n; ++i)
            next[i] = u[i] + (hs / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        check_finite(next, t_next, "state");

        u = next;
        eval(t_next, u, du);
        dense.ts.push_back(t_next);
        dense.us.push_back(u);
        dense.fs.push_back(du);
        saver.step(t_next, u, last);
    }
    if (total == 0) saver.step(cfg.t1, u, true);
    return saver.traj;
}

}  // namespace

Trajectory solve_ode(const VectorField& f, const std::vector<double>& u0, const SolveConfig& cfg) {
    validate_config(cfg);
    if (!f.delays.empty())
        throw SolveError("solve_ode: field has delays; use solve_dde");
    if (static_cast<int>(u0.size()) != f.dim)
        throw SolveError("solve_ode: initial state has dimension " + std::to_string(u0.size()) +
                         ", field has " + std::to_string(f.dim));
    check_finite(u0, cfg.t0, "initial state");
    return cfg.method == Method::rk4 ? solve_rk4(f, u0, cfg) : solve_rk45(f, u0, cfg);
}

Trajectory solve_dde(const VectorField& f, const std::vector<double>& u0, const HistoryFn& history,
                     const SolveConfig& cfg) {
    validate_config(cfg);
    if (static_cast<int>(u0.size()) != f.dim)
        throw SolveError("solve_dde: initial state has dimension " + std::to_string(u0.size()) +
                         ", field has " + std::to_string(f.dim));
    if (!history) throw SolveError("solve_dde: a history function is required");
    check_finite(u0, cfg.t0, "initial state");
    return solve_dde_impl(f, u0, history, cfg);
}

}  // namespace opetri
