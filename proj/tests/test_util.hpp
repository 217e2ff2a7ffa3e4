#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "opetri/compose.hpp"
#include "opetri/dynamics.hpp"
#include "opetri/fixtures.hpp"
#include "opetri/petri.hpp"

namespace testutil {

using namespace opetri;

inline int below(std::mt19937& rng, int n) {
    return static_cast<int>(rng() % static_cast<unsigned>(n));
}

inline double unit(std::mt19937& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline PetriNet random_net(std::mt19937& rng, int max_species = 6, int max_transitions = 5,
                           int max_arcs_per_side = 3) {
    PetriNet net;
    const int ns = 1 + below(rng, max_species);
    for (int s = 0; s < ns; ++s) net.add_species("s" + std::to_string(s));
    const int nt = below(rng, max_transitions + 1);
    for (int t = 0; t < nt; ++t) {
        std::vector<int> in, out;
        const int nin = below(rng, max_arcs_per_side + 1);
        const int nout = below(rng, max_arcs_per_side + 1);
        for (int k = 0; k < nin; ++k) in.push_back(below(rng, ns));
        for (int k = 0; k < nout; ++k) out.push_back(below(rng, ns));
        net.add_transition("t" + std::to_string(t), 0.1 + 1.9 * unit(rng), in, out);
    }
    return net;
}

inline std::vector<double> random_state(std::mt19937& rng, size_t dim, double lo = 0.0,
                                        double hi = 2.0) {
    std::vector<double> u(dim);
    for (auto& x : u) x = lo + (hi - lo) * unit(rng);
    return u;
}

// A wiring diagram together with open nets bound to every box.
struct RandomComposition {
    UWD uwd;
    Binding binding;
};

inline RandomComposition random_composition(std::mt19937& rng, int max_boxes = 4,
                                            int max_species = 6, bool distinct_legs = false) {
    RandomComposition rc;
    const int nj = 1 + below(rng, 5);
    for (int j = 0; j < nj; ++j) rc.uwd.junctions.push_back({"j" + std::to_string(j)});
    const int n_outer = below(rng, nj + 1);
    for (int k = 0; k < n_outer; ++k) rc.uwd.outer_ports.push_back(below(rng, nj));

    const int nb = 1 + below(rng, max_boxes);
    for (int b = 0; b < nb; ++b) {
        OpenPetriNet model;
        model.net = random_net(rng, max_species);
        const int ns = static_cast<int>(model.net.species.size());
        int n_ports = below(rng, 5);
        if (distinct_legs) n_ports = std::min(n_ports, ns);
        BoxRec box;
        box.name = "b" + std::to_string(b);
        std::vector<int> pool;
        for (int s = 0; s < ns; ++s) pool.push_back(s);
        for (int p = 0; p < n_ports; ++p) {
            box.ports.push_back(below(rng, nj));
            if (distinct_legs) {
                const int pick = below(rng, static_cast<int>(pool.size()));
                model.legs.push_back(pool[static_cast<size_t>(pick)]);
                pool.erase(pool.begin() + pick);
            } else {
                model.legs.push_back(below(rng, ns));
            }
        }
        rc.uwd.boxes.push_back(box);
        rc.binding[box.name] = std::move(model);
    }
    return rc;
}

// A random model typed by `type_net`, built from the type net outwards so
// the typing is valid by construction: one species per type is always
// present, transitions instantiate a type transition with compatible
// species choices for every arc.
inline TypedPetriNet random_typed_net(std::mt19937& rng, const PetriNet& type_net,
                                      int extra_species = 3, int max_transitions = 4) {
    PetriNet net;
    std::vector<int> species_types;
    const int n_types = static_cast<int>(type_net.species.size());
    for (int ts = 0; ts < n_types; ++ts) {
        net.add_species("s" + std::to_string(ts));
        species_types.push_back(ts);
    }
    const int extra = below(rng, extra_species + 1);
    for (int k = 0; k < extra; ++k) {
        net.add_species("x" + std::to_string(k));
        species_types.push_back(below(rng, n_types));
    }
    std::vector<std::vector<int>> of_type(static_cast<size_t>(n_types));
    for (size_t s = 0; s < species_types.size(); ++s)
        of_type[static_cast<size_t>(species_types[s])].push_back(static_cast<int>(s));

    std::vector<int> transition_types;
    const int nt = below(rng, max_transitions + 1);
    for (int t = 0; t < nt; ++t) {
        const int tau = below(rng, static_cast<int>(type_net.transitions.size()));
        std::vector<int> in, out;
        for (const auto& a : type_net.inputs)
            if (a.transition == tau) {
                const auto& pool = of_type[static_cast<size_t>(a.species)];
                in.push_back(pool[static_cast<size_t>(below(rng, static_cast<int>(pool.size())))]);
            }
        for (const auto& a : type_net.outputs)
            if (a.transition == tau) {
                const auto& pool = of_type[static_cast<size_t>(a.species)];
                out.push_back(pool[static_cast<size_t>(below(rng, static_cast<int>(pool.size())))]);
            }
        net.add_transition("t" + std::to_string(t), 0.1 + 1.9 * unit(rng), in, out);
        transition_types.push_back(tau);
    }
    return fixtures::typed_by(net, type_net, species_types, transition_types);
}

// Copy of a net with species, transitions, and arcs independently permuted.
inline PetriNet permuted_copy(std::mt19937& rng, const PetriNet& net) {
    auto perm = [&](size_t n) {
        std::vector<int> p(n);
        for (size_t i = 0; i < n; ++i) p[i] = static_cast<int>(i);
        for (size_t i = n; i > 1; --i) std::swap(p[i - 1], p[static_cast<size_t>(below(rng, static_cast<int>(i)))]);
        return p;
    };
    const auto sp = perm(net.species.size());     // old index -> new index
    const auto tp = perm(net.transitions.size());
    PetriNet out;
    out.species.resize(net.species.size());
    out.transitions.resize(net.transitions.size());
    for (size_t s = 0; s < net.species.size(); ++s)
        out.species[static_cast<size_t>(sp[s])] = net.species[s];
    for (size_t t = 0; t < net.transitions.size(); ++t)
        out.transitions[static_cast<size_t>(tp[t])] = net.transitions[t];
    for (const auto& a : net.inputs)
        out.inputs.push_back({sp[static_cast<size_t>(a.species)], tp[static_cast<size_t>(a.transition)]});
    for (const auto& a : net.outputs)
        out.outputs.push_back({sp[static_cast<size_t>(a.species)], tp[static_cast<size_t>(a.transition)]});
    const auto ip = perm(net.inputs.size());
    const auto op = perm(net.outputs.size());
    std::vector<InputArc> ins(net.inputs.size());
    std::vector<OutputArc> outs(net.outputs.size());
    for (size_t i = 0; i < out.inputs.size(); ++i) ins[static_cast<size_t>(ip[i])] = out.inputs[i];
    for (size_t i = 0; i < out.outputs.size(); ++i) outs[static_cast<size_t>(op[i])] = out.outputs[i];
    out.inputs = ins;
    out.outputs = outs;
    return out;
}

inline std::vector<double> eval_field(const VectorField& f, double t,
                                      const std::vector<double>& u) {
    std::vector<double> du(static_cast<size_t>(f.dim));
    const HistoryFn none = [&u](double, std::span<double> out) {
        for (size_t i = 0; i < out.size(); ++i) out[i] = u[i];
    };
    f.eval(t, u, none, du);
    return du;
}

inline bool close_rel(double x, double y, double tol) {
    return std::fabs(x - y) <= tol * std::max({1.0, std::fabs(x), std::fabs(y)});
}

inline bool uwd_equal(const UWD& a, const UWD& b) {
    if (a.outer_ports != b.outer_ports) return false;
    if (a.junctions.size() != b.junctions.size() || a.boxes.size() != b.boxes.size()) return false;
    for (size_t j = 0; j < a.junctions.size(); ++j)
        if (a.junctions[j].name != b.junctions[j].name) return false;
    for (size_t i = 0; i < a.boxes.size(); ++i)
        if (a.boxes[i].name != b.boxes[i].name || a.boxes[i].ports != b.boxes[i].ports) return false;
    return true;
}

}  // namespace testutil
