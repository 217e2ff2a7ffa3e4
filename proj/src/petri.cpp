#include "opetri/petri.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace opetri {

int PetriNet::add_species(std::string name) {
    species.push_back({std::move(name)});
    return static_cast<int>(species.size()) - 1;
}

int PetriNet::add_transition(std::string name, double rate,
                             const std::vector<int>& in_species,
                             const std::vector<int>& out_species) {
    transitions.push_back({std::move(name), rate});
    const int t = static_cast<int>(transitions.size()) - 1;
    for (int s : in_species) inputs.push_back({s, t});
    for (int s : out_species) outputs.push_back({s, t});
    return t;
}

std::optional<int> PetriNet::species_index(const std::string& name) const {
    for (size_t i = 0; i < species.size(); ++i)
        if (species[i].name == name) return static_cast<int>(i);
    return std::nullopt;
}

std::optional<int> PetriNet::transition_index(const std::string& name) const {
    for (size_t i = 0; i < transitions.size(); ++i)
        if (transitions[i].name == name) return static_cast<int>(i);
    return std::nullopt;
}

std::vector<int> PetriNet::transition_inputs(int t) const {
    std::vector<int> out;
    for (const auto& a : inputs)
        if (a.transition == t) out.push_back(a.species);
    return out;
}

std::vector<int> PetriNet::transition_outputs(int t) const {
    std::vector<int> out;
    for (const auto& a : outputs)
        if (a.transition == t) out.push_back(a.species);
    return out;
}

std::map<std::string, double> PetriNet::rate_map() const {
    std::map<std::string, double> m;
    for (const auto& t : transitions) m[t.name] = t.rate;
    return m;
}

bool same_presentation(const PetriNet& a, const PetriNet& b) {
    if (a.species.size() != b.species.size()) return false;
    if (a.transitions.size() != b.transitions.size()) return false;
    if (a.inputs.size() != b.inputs.size()) return false;
    if (a.outputs.size() != b.outputs.size()) return false;
    for (size_t i = 0; i < a.inputs.size(); ++i)
        if (a.inputs[i].species != b.inputs[i].species ||
            a.inputs[i].transition != b.inputs[i].transition)
            return false;
    for (size_t i = 0; i < a.outputs.size(); ++i)
        if (a.outputs[i].species != b.outputs[i].species ||
            a.outputs[i].transition != b.outputs[i].transition)
            return false;
    return true;
}

PetriMorphism identity_morphism(const PetriNet& net) {
    PetriMorphism f;
    f.dom = net;
    f.cod = net;
    f.species_map.resize(net.species.size());
    f.transition_map.resize(net.transitions.size());
    f.input_map.resize(net.inputs.size());
    f.output_map.resize(net.outputs.size());
    for (size_t i = 0; i < f.species_map.size(); ++i) f.species_map[i] = static_cast<int>(i);
    for (size_t i = 0; i < f.transition_map.size(); ++i) f.transition_map[i] = static_cast<int>(i);
    for (size_t i = 0; i < f.input_map.size(); ++i) f.input_map[i] = static_cast<int>(i);
    for (size_t i = 0; i < f.output_map.size(); ++i) f.output_map[i] = static_cast<int>(i);
    return f;
}

PetriMorphism compose_morphisms(const PetriMorphism& f, const PetriMorphism& g) {
    if (!same_presentation(f.cod, g.dom))
        throw Error("compose_morphisms: codomain of first does not match domain of second");
    auto through = [](const std::vector<int>& a, const std::vector<int>& b) {
        std::vector<int> r(a.size());
        for (size_t i = 0; i < a.size(); ++i) r[i] = b.at(static_cast<size_t>(a[i]));
        return r;
    };
    PetriMorphism h;
    h.dom = f.dom;
    h.cod = g.cod;
    h.species_map = through(f.species_map, g.species_map);
    h.transition_map = through(f.transition_map, g.transition_map);
    h.input_map = through(f.input_map, g.input_map);
    h.output_map = through(f.output_map, g.output_map);
    return h;
}

namespace {

std::string fmt_loc(const char* kind, size_t idx) {
    std::ostringstream os;
    os << kind << " " << idx;
    return os.str();
}

}  // namespace

std::vector<std::string> validate_net(const PetriNet& net) {
    std::vector<std::string> v;
    const int ns = static_cast<int>(net.species.size());
    const int nt = static_cast<int>(net.transitions.size());

    std::map<std::string, size_t> seen;
    for (size_t i = 0; i < net.species.size(); ++i) {
        auto [it, fresh] = seen.emplace(net.species[i].name, i);
        if (!fresh) {
            std::ostringstream os;
            os << "species " << it->second << " and " << i << ": duplicate name \""
               << net.species[i].name << "\"";
            v.push_back(os.str());
        }
    }
    seen.clear();
    for (size_t i = 0; i < net.transitions.size(); ++i) {
        auto [it, fresh] = seen.emplace(net.transitions[i].name, i);
        if (!fresh) {
            std::ostringstream os;
            os << "transitions " << it->second << " and " << i << ": duplicate name \""
               << net.transitions[i].name << "\"";
            v.push_back(os.str());
        }
        const double r = net.transitions[i].rate;
        if (!std::isfinite(r)) {
            v.push_back("transition " + std::to_string(i) + " (\"" + net.transitions[i].name +
                        "\"): rate is not finite");
        } else if (r < 0.0) {
            std::ostringstream os;
            os << "transition " << i << " (\"" << net.transitions[i].name << "\"): rate " << r
               << " is negative";
            v.push_back(os.str());
        }
    }
    for (size_t i = 0; i < net.inputs.size(); ++i) {
        if (net.inputs[i].species < 0 || net.inputs[i].species >= ns)
            v.push_back(fmt_loc("input arc", i) + ": species index " +
                        std::to_string(net.inputs[i].species) + " out of range [0, " +
                        std::to_string(ns) + ")");
        if (net.inputs[i].transition < 0 || net.inputs[i].transition >= nt)
            v.push_back(fmt_loc("input arc", i) + ": transition index " +
                        std::to_string(net.inputs[i].transition) + " out of range [0, " +
                        std::to_string(nt) + ")");
    }
    for (size_t i = 0; i < net.outputs.size(); ++i) {
        if (net.outputs[i].species < 0 || net.outputs[i].species >= ns)
            v.push_back(fmt_loc("output arc", i) + ": species index " +
                        std::to_string(net.outputs[i].species) + " out of range [0, " +
                        std::to_string(ns) + ")");
        if (net.outputs[i].transition < 0 || net.outputs[i].transition >= nt)
            v.push_back(fmt_loc("output arc", i) + ": transition index " +
                        std::to_string(net.outputs[i].transition) + " out of range [0, " +
                        std::to_string(nt) + ")");
    }
    return v;
}

namespace {

bool in_range(int i, size_t n) { return i >= 0 && static_cast<size_t>(i) < n; }

// Checks length and codomain range of one component map; pushes violations.
bool check_map(const std::vector<int>& m, size_t dom_n, size_t cod_n, const char* what,
               std::vector<std::string>& v) {
    bool ok = true;
    if (m.size() != dom_n) {
        v.push_back(std::string(what) + ": map has " + std::to_string(m.size()) +
                    " entries, domain has " + std::to_string(dom_n));
        ok = false;
    }
    for (size_t i = 0; i < m.size(); ++i) {
        if (!in_range(m[i], cod_n)) {
            v.push_back(std::string(what) + ": image of " + std::to_string(i) + " is " +
                        std::to_string(m[i]) + ", out of range [0, " + std::to_string(cod_n) + ")");
            ok = false;
        }
    }
    return ok;
}

}  // namespace

std::vector<std::string> validate_morphism(const PetriMorphism& f) {
    std::vector<std::string> v;
    bool maps_ok = true;
    maps_ok &= check_map(f.species_map, f.dom.species.size(), f.cod.species.size(), "species_map", v);
    maps_ok &= check_map(f.transition_map, f.dom.transitions.size(), f.cod.transitions.size(),
                         "transition_map", v);
    maps_ok &= check_map(f.input_map, f.dom.inputs.size(), f.cod.inputs.size(), "input_map", v);
    maps_ok &= check_map(f.output_map, f.dom.outputs.size(), f.cod.outputs.size(), "output_map", v);
    if (!maps_ok) return v;

    auto tname = [&](int t) { return "\"" + f.dom.transitions[static_cast<size_t>(t)].name + "\""; };

    // Commuting squares with the arc source/target functions.
    for (size_t i = 0; i < f.dom.inputs.size(); ++i) {
        const auto& a = f.dom.inputs[i];
        const auto& b = f.cod.inputs[static_cast<size_t>(f.input_map[i])];
        if (b.species != f.species_map[static_cast<size_t>(a.species)])
            v.push_back("input arc " + std::to_string(i) + " of transition " + tname(a.transition) +
                        ": source square fails (cod source " + std::to_string(b.species) +
                        " != mapped source " +
                        std::to_string(f.species_map[static_cast<size_t>(a.species)]) + ")");
        if (b.transition != f.transition_map[static_cast<size_t>(a.transition)])
            v.push_back("input arc " + std::to_string(i) + " of transition " + tname(a.transition) +
                        ": target square fails (cod target " + std::to_string(b.transition) +
                        " != mapped target " +
                        std::to_string(f.transition_map[static_cast<size_t>(a.transition)]) + ")");
    }
    for (size_t i = 0; i < f.dom.outputs.size(); ++i) {
        const auto& a = f.dom.outputs[i];
        const auto& b = f.cod.outputs[static_cast<size_t>(f.output_map[i])];
        if (b.species != f.species_map[static_cast<size_t>(a.species)])
            v.push_back("output arc " + std::to_string(i) + " of transition " + tname(a.transition) +
                        ": target square fails (cod target " + std::to_string(b.species) +
                        " != mapped target " +
                        std::to_string(f.species_map[static_cast<size_t>(a.species)]) + ")");
        if (b.transition != f.transition_map[static_cast<size_t>(a.transition)])
            v.push_back("output arc " + std::to_string(i) + " of transition " + tname(a.transition) +
                        ": source square fails (cod source " + std::to_string(b.transition) +
                        " != mapped source " +
                        std::to_string(f.transition_map[static_cast<size_t>(a.transition)]) + ")");
    }

    // Arity preservation: restricted to the arcs of one dom transition, the
    // arc map must biject onto the arcs of the image transition.
    for (size_t t = 0; t < f.dom.transitions.size(); ++t) {
        const int tc = f.transition_map[t];
        auto check_fiber = [&](const auto& dom_arcs, const auto& cod_arcs,
                               const std::vector<int>& amap, const char* side) {
            std::vector<int> fiber;
            for (size_t i = 0; i < dom_arcs.size(); ++i)
                if (dom_arcs[i].transition == static_cast<int>(t)) fiber.push_back(static_cast<int>(i));
            size_t cod_count = 0;
            for (const auto& a : cod_arcs)
                if (a.transition == tc) ++cod_count;
            std::set<int> image;
            for (int i : fiber) image.insert(amap[static_cast<size_t>(i)]);
            if (image.size() != fiber.size() || fiber.size() != cod_count) {
                v.push_back("transition " + tname(static_cast<int>(t)) + ": " + side +
                            " arcs do not map bijectively onto those of its image (" +
                            std::to_string(fiber.size()) + " dom arcs, " + std::to_string(cod_count) +
                            " cod arcs, " + std::to_string(image.size()) + " distinct images)");
            }
        };
        check_fiber(f.dom.inputs, f.cod.inputs, f.input_map, "input");
        check_fiber(f.dom.outputs, f.cod.outputs, f.output_map, "output");
    }
    return v;
}

std::vector<std::string> validate_typed_net(const TypedPetriNet& tp) {
    std::vector<std::string> v = validate_net(tp.net());
    for (auto& s : v) s = "net: " + s;
    auto tv = validate_net(tp.type_net());
    for (auto& s : tv) v.push_back("type net: " + s);
    if (!v.empty()) return v;
    auto mv = validate_morphism(tp.typing);
    for (auto& s : mv) v.push_back("typing: " + s);
    return v;
}

bool conserves_population(const PetriNet& net) {
    for (size_t t = 0; t < net.transitions.size(); ++t) {
        size_t nin = 0, nout = 0;
        for (const auto& a : net.inputs)
            if (a.transition == static_cast<int>(t)) ++nin;
        for (const auto& a : net.outputs)
            if (a.transition == static_cast<int>(t)) ++nout;
        if (nin != nout) return false;
    }
    return true;
}

bool conserves_population(const TypedPetriNet& tp) { return conserves_population(tp.net()); }

namespace {

// Iso-invariant fingerprints. A species is profiled by the sorted list of
// its per-transition arc multiplicities, a transition by the sorted
// per-species multiplicities of its arcs.
struct Profiles {
    std::vector<std::vector<std::pair<int, int>>> species;  // (in mult, out mult) sorted
    std::vector<std::vector<std::pair<int, int>>> transitions;
};

Profiles profiles_of(const PetriNet& net) {
    const size_t ns = net.species.size(), nt = net.transitions.size();
    std::vector<std::vector<int>> in_mult(ns, std::vector<int>(nt, 0));
    std::vector<std::vector<int>> out_mult(ns, std::vector<int>(nt, 0));
    for (const auto& a : net.inputs) ++in_mult[static_cast<size_t>(a.species)][static_cast<size_t>(a.transition)];
    for (const auto& a : net.outputs) ++out_mult[static_cast<size_t>(a.species)][static_cast<size_t>(a.transition)];

    Profiles p;
    p.species.resize(ns);
    for (size_t s = 0; s < ns; ++s) {
        for (size_t t = 0; t < nt; ++t)
            if (in_mult[s][t] || out_mult[s][t]) p.species[s].push_back({in_mult[s][t], out_mult[s][t]});
        std::sort(p.species[s].begin(), p.species[s].end());
    }
    p.transitions.resize(nt);
    for (size_t t = 0; t < nt; ++t) {
        for (size_t s = 0; s < ns; ++s)
            if (in_mult[s][t] || out_mult[s][t]) p.transitions[t].push_back({in_mult[s][t], out_mult[s][t]});
        std::sort(p.transitions[t].begin(), p.transitions[t].end());
    }
    return p;
}

struct IsoSearch {
    const PetriNet& p;
    const PetriNet& q;
    Profiles pp, qp;
    std::vector<int> smap;       // p species -> q species, -1 unassigned
    std::vector<bool> sused;
    std::vector<int> tmap;
    std::vector<bool> tused;
    long nodes = 0;
    long node_limit;

    IsoSearch(const PetriNet& p_, const PetriNet& q_, long limit)
        : p(p_), q(q_), pp(profiles_of(p_)), qp(profiles_of(q_)), node_limit(limit) {
        smap.assign(p.species.size(), -1);
        sused.assign(q.species.size(), false);
        tmap.assign(p.transitions.size(), -1);
        tused.assign(q.transitions.size(), false);
    }

    void tick() {
        if (++nodes > node_limit)
            throw SearchLimitError("isomorphism search exceeded node limit of " +
                                   std::to_string(node_limit));
    }

    // Multiset of mapped arc endpoints of p transition t vs q transition tq.
    bool arcs_match(int t, int tq) const {
        auto key = [&](const std::vector<int>& sp, bool mapped) {
            std::vector<int> k;
            k.reserve(sp.size());
            for (int s : sp) k.push_back(mapped ? smap[static_cast<size_t>(s)] : s);
            std::sort(k.begin(), k.end());
            return k;
        };
        return key(p.transition_inputs(t), true) == key(q.transition_inputs(tq), false) &&
               key(p.transition_outputs(t), true) == key(q.transition_outputs(tq), false);
    }

    bool assign_transitions(size_t t) {
        if (t == p.transitions.size()) return true;
        tick();
        for (size_t tq = 0; tq < q.transitions.size(); ++tq) {
            if (tused[tq]) continue;
            if (pp.transitions[t] != qp.transitions[tq]) continue;
            if (!arcs_match(static_cast<int>(t), static_cast<int>(tq))) continue;
            tmap[t] = static_cast<int>(tq);
            tused[tq] = true;
            if (assign_transitions(t + 1)) return true;
            tused[tq] = false;
            tmap[t] = -1;
        }
        return false;
    }

    bool assign_species(size_t s) {
        if (s == p.species.size()) return assign_transitions(0);
        tick();
        for (size_t sq = 0; sq < q.species.size(); ++sq) {
            if (sused[sq]) continue;
            if (pp.species[s] != qp.species[sq]) continue;
            smap[s] = static_cast<int>(sq);
            sused[sq] = true;
            if (assign_species(s + 1)) return true;
            sused[sq] = false;
            smap[s] = -1;
        }
        return false;
    }
};

}  // namespace

std::optional<PetriMorphism> is_isomorphic(const PetriNet& p, const PetriNet& q,
                                           const IsoOptions& opts) {
    if (p.species.size() != q.species.size() || p.transitions.size() != q.transitions.size() ||
        p.inputs.size() != q.inputs.size() || p.outputs.size() != q.outputs.size())
        return std::nullopt;

    IsoSearch search(p, q, opts.node_limit);
    if (!search.assign_species(0)) return std::nullopt;

    PetriMorphism f;
    f.dom = p;
    f.cod = q;
    f.species_map = search.smap;
    f.transition_map = search.tmap;

    // Pair up arcs greedily: the multiset checks above guarantee a match.
    auto pair_arcs = [&](const auto& dom_arcs, const auto& cod_arcs, std::vector<int>& amap) {
        std::vector<bool> used(cod_arcs.size(), false);
        amap.assign(dom_arcs.size(), -1);
        for (size_t i = 0; i < dom_arcs.size(); ++i) {
            const int s = f.species_map[static_cast<size_t>(dom_arcs[i].species)];
            const int t = f.transition_map[static_cast<size_t>(dom_arcs[i].transition)];
            for (size_t j = 0; j < cod_arcs.size(); ++j) {
                if (used[j]) continue;
                if (cod_arcs[j].species == s && cod_arcs[j].transition == t) {
                    amap[i] = static_cast<int>(j);
                    used[j] = true;
                    break;
                }
            }
            if (amap[i] < 0) throw Error("internal: isomorphism arc pairing failed");
        }
    };
    pair_arcs(p.inputs, q.inputs, f.input_map);
    pair_arcs(p.outputs, q.outputs, f.output_map);
    return f;
}

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string to_dot(const PetriNet& net, const DotOptions& opts) {
    std::ostringstream os;
    os << "digraph \"" << dot_escape(opts.graph_name) << "\" {\n";
    for (const auto& c : opts.comments) os << "  // " << c << "\n";
    os << "  rankdir=LR;\n";
    for (size_t i = 0; i < net.species.size(); ++i) {
        const auto& name = net.species[i].name;
        std::string fill = "#a6cbe8";
        if (auto it = opts.species_fill.find(name); it != opts.species_fill.end()) fill = it->second;
        os << "  s" << i << " [label=\"" << dot_escape(name)
           << "\", shape=circle, style=filled, fillcolor=\"" << dot_escape(fill) << "\"];\n";
    }
    for (size_t i = 0; i < net.transitions.size(); ++i) {
        const auto& name = net.transitions[i].name;
        std::string fill = "#f0a860";
        if (auto it = opts.transition_fill.find(name); it != opts.transition_fill.end())
            fill = it->second;
        os << "  t" << i << " [label=\"" << dot_escape(name)
           << "\", shape=box, style=filled, fillcolor=\"" << dot_escape(fill) << "\"];\n";
    }
    for (const auto& a : net.inputs) os << "  s" << a.species << " -> t" << a.transition << ";\n";
    for (const auto& a : net.outputs) os << "  t" << a.transition << " -> s" << a.species << ";\n";
    os << "}\n";
    return os.str();
}

}  // namespace opetri
