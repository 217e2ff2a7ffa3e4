#include "opetri/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace opetri {

VectorField mass_action(const PetriNet& net) {
    {
        auto v = validate_net(net);
        if (!v.empty()) throw Error("mass_action: invalid net: " + v.front());
    }
    VectorField f;
    f.dim = static_cast<int>(net.species.size());
    for (const auto& s : net.species) f.var_names.push_back(s.name);

    // Flattened per-transition arc lists; the closure owns them.
    struct Compiled {
        std::vector<double> rates;
        std::vector<std::vector<int>> in_species;   // per transition, arc order
        std::vector<std::vector<int>> out_species;
    };
    Compiled c;
    for (size_t t = 0; t < net.transitions.size(); ++t) {
        c.rates.push_back(net.transitions[t].rate);
        c.in_species.push_back(net.transition_inputs(static_cast<int>(t)));
        c.out_species.push_back(net.transition_outputs(static_cast<int>(t)));
    }

    f.eval = [c = std::move(c)](double, std::span<const double> u, const HistoryFn&,
                                std::span<double> du) {
        std::fill(du.begin(), du.end(), 0.0);
        for (size_t t = 0; t < c.rates.size(); ++t) {
            double phi = c.rates[t];
            for (int s : c.in_species[t]) phi *= u[static_cast<size_t>(s)];
            for (int s : c.in_species[t]) du[static_cast<size_t>(s)] -= phi;
            for (int s : c.out_species[t]) du[static_cast<size_t>(s)] += phi;
        }
    };
    return f;
}

OpenDynamics petri_to_open_dynamics(const OpenPetriNet& m) {
    {
        auto v = validate_open_net(m);
        if (!v.empty()) throw Error("petri_to_open_dynamics: invalid open net: " + v.front());
    }
    return {mass_action(m.net), m.legs};
}

OpenDynamics compose_dynamics(const UWD& u, const DynamicsBinding& binding) {
    {
        auto v = validate_uwd(u);
        if (!v.empty()) throw ComposeError("invalid UWD: " + v.front());
    }
    for (const auto& b : u.boxes)
        if (!binding.count(b.name)) throw ComposeError("box \"" + b.name + "\" has no bound model");
    for (const auto& [name, d] : binding) {
        bool known = false;
        for (const auto& b : u.boxes) known |= (b.name == name);
        if (!known) throw ComposeError("binding names box \"" + name + "\" which is not in the diagram");
    }

    std::vector<const OpenDynamics*> comps;
    for (const auto& b : u.boxes) comps.push_back(&binding.at(b.name));

    bool any_delays = false;
    for (const auto* d : comps) any_delays |= !d->field.delays.empty();
    for (size_t b = 0; b < comps.size(); ++b) {
        if (comps[b]->legs.size() != u.boxes[b].ports.size()) {
            std::ostringstream os;
            os << "box \"" << u.boxes[b].name << "\" has " << u.boxes[b].ports.size()
               << " ports but its model exposes " << comps[b]->legs.size() << " legs";
            throw ComposeError(os.str());
        }
        for (int leg : comps[b]->legs)
            if (leg < 0 || leg >= comps[b]->field.dim)
                throw ComposeError("box \"" + u.boxes[b].name + "\": leg index out of range");
        const bool capable = comps[b]->field.delay_capable || !comps[b]->field.delays.empty();
        if (any_delays && !capable)
            throw ComposeError("box \"" + u.boxes[b].name +
                               "\" is a plain ODE; apply ode_to_dde before composing with delay components");
    }

    std::vector<std::vector<int>> legs;
    std::vector<int> sizes;
    std::vector<std::vector<std::string>> names;
    for (const auto* d : comps) {
        legs.push_back(d->legs);
        sizes.push_back(d->field.dim);
        names.push_back(d->field.var_names);
    }
    const Quotient q = quotient_junctions(u, legs, sizes, names);

    OpenDynamics out;
    out.field.dim = q.class_count;
    out.field.var_names = q.class_names;
    out.legs = q.outer_classes;
    out.field.delay_capable = false;
    for (const auto* d : comps) {
        out.field.delay_capable |= d->field.delay_capable;
        for (double tau : d->field.delays) out.field.delays.push_back(tau);
    }
    std::sort(out.field.delays.begin(), out.field.delays.end());
    out.field.delays.erase(std::unique(out.field.delays.begin(), out.field.delays.end()),
                           out.field.delays.end());

    // Copy the component fields and the scatter maps into the closure.
    struct Part {
        VectorField field;
        std::vector<int> to_class;  // local variable -> composite variable
    };
    auto parts = std::make_shared<std::vector<Part>>();
    for (size_t b = 0; b < comps.size(); ++b)
        parts->push_back({comps[b]->field, q.element_class[b]});

    out.field.eval = [parts](double t, std::span<const double> u_all, const HistoryFn& history,
                             std::span<double> du_all) {
        std::fill(du_all.begin(), du_all.end(), 0.0);
        for (const auto& part : *parts) {
            const size_t n = static_cast<size_t>(part.field.dim);
            std::vector<double> local_u(n), local_du(n);
            for (size_t i = 0; i < n; ++i)
                local_u[i] = u_all[static_cast<size_t>(part.to_class[i])];
            HistoryFn local_history;
            if (history) {
                local_history = [&](double s, std::span<double> out_local) {
                    std::vector<double> full(du_all.size());
                    history(s, full);
                    for (size_t i = 0; i < out_local.size(); ++i)
                        out_local[i] = full[static_cast<size_t>(part.to_class[i])];
                };
            }
            part.field.eval(t, local_u, local_history, local_du);
            for (size_t i = 0; i < n; ++i)
                du_all[static_cast<size_t>(part.to_class[i])] += local_du[i];
        }
    };
    return out;
}

OpenDynamics ode_to_dde(const OpenDynamics& d) {
    if (!d.field.delays.empty())
        throw Error("ode_to_dde: input already has delays");
    OpenDynamics out = d;
    out.field.delay_capable = true;
    return out;
}

namespace {

double param(const std::map<std::string, double>& params, const std::string& key,
             const std::string& component) {
    auto it = params.find(key);
    if (it == params.end())
        throw Error("component \"" + component + "\" needs parameter \"" + key + "\"");
    return it->second;
}

void check_params(const std::map<std::string, double>& params,
                  const std::vector<std::string>& expected, const std::string& component) {
    for (const auto& [key, value] : params) {
        (void)value;
        if (std::find(expected.begin(), expected.end(), key) == expected.end())
            throw Error("component \"" + component + "\" does not take parameter \"" + key + "\"");
    }
}

}  // namespace

OpenDynamics make_component(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "rm_host") {
        check_params(params, {"r"}, name);
        const double r = param(params, "r", name);
        OpenDynamics d;
        d.field.dim = 1;
        d.field.var_names = {"I_H"};
        d.field.eval = [r](double, std::span<const double> u, const HistoryFn&,
                           std::span<double> du) { du[0] = -r * u[0]; };
        d.legs = {0};
        return d;
    }
    if (name == "rm_vector") {
        check_params(params, {"g"}, name);
        const double g = param(params, "g", name);
        OpenDynamics d;
        d.field.dim = 1;
        d.field.var_names = {"I_V"};
        d.field.eval = [g](double, std::span<const double> u, const HistoryFn&,
                           std::span<double> du) { du[0] = -g * u[0]; };
        d.legs = {0};
        return d;
    }
    if (name == "rm_bloodmeal") {
        check_params(params, {"a", "b", "c", "H", "V"}, name);
        const double a = param(params, "a", name);
        const double b = param(params, "b", name);
        const double c = param(params, "c", name);
        const double H = param(params, "H", name);
        const double V = param(params, "V", name);
        OpenDynamics d;
        d.field.dim = 2;
        d.field.var_names = {"I_H", "I_V"};
        d.field.eval = [=](double, std::span<const double> u, const HistoryFn&,
                           std::span<double> du) {
            du[0] = a * b * (u[1] / H) * (H - u[0]);
            du[1] = a * c * (u[0] / H) * (V - u[1]);
        };
        d.legs = {0, 1};
        return d;
    }
    if (name == "rm_bloodmeal_delay") {
        check_params(params, {"a", "b", "c", "H", "V", "tau"}, name);
        const double a = param(params, "a", name);
        const double b = param(params, "b", name);
        const double c = param(params, "c", name);
        const double H = param(params, "H", name);
        const double V = param(params, "V", name);
        const double tau = param(params, "tau", name);
        if (tau < 0) throw Error("rm_bloodmeal_delay: tau must be nonnegative");
        OpenDynamics d;
        d.field.dim = 2;
        d.field.var_names = {"I_H", "I_V"};
        d.field.delays = {tau};
        d.field.delay_capable = true;
        d.field.eval = [=](double t, std::span<const double> u, const HistoryFn& history,
                           std::span<double> du) {
            std::vector<double> lagged(2);
            history(t - tau, lagged);
            du[0] = a * b * (u[1] / H) * (H - u[0]);
            du[1] = a * c * (lagged[0] / H) * (V - lagged[1]);
        };
        d.legs = {0, 1};
        return d;
    }
    throw Error("unknown dynamics component \"" + name + "\"");
}

std::vector<std::string> component_names() {
    return {"rm_host", "rm_vector", "rm_bloodmeal", "rm_bloodmeal_delay"};
}

}  // namespace opetri
