#include "opetri/compose.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace opetri {

int UWD::port_count() const {
    int n = 0;
    for (const auto& b : boxes) n += static_cast<int>(b.ports.size());
    return n;
}

std::optional<int> UWD::junction_index(const std::string& name) const {
    for (size_t j = 0; j < junctions.size(); ++j)
        if (junctions[j].name == name) return static_cast<int>(j);
    return std::nullopt;
}

std::vector<std::string> validate_uwd(const UWD& u) {
    std::vector<std::string> v;
    const int nj = static_cast<int>(u.junctions.size());
    for (size_t i = 0; i < u.outer_ports.size(); ++i)
        if (u.outer_ports[i] < 0 || u.outer_ports[i] >= nj)
            v.push_back("outer port " + std::to_string(i) + ": junction index " +
                        std::to_string(u.outer_ports[i]) + " out of range [0, " + std::to_string(nj) +
                        ")");
    std::map<std::string, size_t> seen;
    for (size_t j = 0; j < u.junctions.size(); ++j) {
        auto [it, fresh] = seen.emplace(u.junctions[j].name, j);
        if (!fresh)
            v.push_back("junctions " + std::to_string(it->second) + " and " + std::to_string(j) +
                        ": duplicate name \"" + u.junctions[j].name + "\"");
    }
    seen.clear();
    for (size_t b = 0; b < u.boxes.size(); ++b) {
        auto [it, fresh] = seen.emplace(u.boxes[b].name, b);
        if (!fresh)
            v.push_back("boxes " + std::to_string(it->second) + " and " + std::to_string(b) +
                        ": duplicate name \"" + u.boxes[b].name + "\"");
        for (size_t p = 0; p < u.boxes[b].ports.size(); ++p)
            if (u.boxes[b].ports[p] < 0 || u.boxes[b].ports[p] >= nj)
                v.push_back("box \"" + u.boxes[b].name + "\" port " + std::to_string(p) +
                            ": junction index " + std::to_string(u.boxes[b].ports[p]) +
                            " out of range [0, " + std::to_string(nj) + ")");
    }
    return v;
}

std::vector<std::string> validate_open_net(const OpenPetriNet& m) {
    std::vector<std::string> v = validate_net(m.net);
    const int ns = static_cast<int>(m.net.species.size());
    for (size_t i = 0; i < m.legs.size(); ++i)
        if (m.legs[i] < 0 || m.legs[i] >= ns)
            v.push_back("leg " + std::to_string(i) + ": species index " + std::to_string(m.legs[i]) +
                        " out of range [0, " + std::to_string(ns) + ")");
    return v;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[static_cast<size_t>(x)] != x) {
            parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
            x = parent[static_cast<size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        // Keep the smaller global index as root so class order falls out of
        // root order directly.
        if (b < a) std::swap(a, b);
        parent[static_cast<size_t>(b)] = a;
    }
};

// Appends "~2", "~3", ... to later duplicates so the composite always
// satisfies the unique-name invariant, even for adversarial inputs.
void dedup_names(std::vector<std::string>& names) {
    std::map<std::string, int> count;
    for (const auto& n : names) ++count[n];
    std::map<std::string, int> seen;
    for (auto& n : names) {
        if (count[n] <= 1) continue;
        int k = ++seen[n];
        if (k > 1) n += "~" + std::to_string(k);
    }
}

void check_binding_shape(const UWD& u, const std::vector<std::string>& bound_names,
                         const std::vector<size_t>& leg_counts) {
    std::set<std::string> box_names;
    for (const auto& b : u.boxes) box_names.insert(b.name);
    for (const auto& n : bound_names)
        if (!box_names.count(n))
            throw ComposeError("binding names box \"" + n + "\" which is not in the diagram");
    for (size_t b = 0; b < u.boxes.size(); ++b) {
        auto it = std::find(bound_names.begin(), bound_names.end(), u.boxes[b].name);
        if (it == bound_names.end())
            throw ComposeError("box \"" + u.boxes[b].name + "\" has no bound model");
        const size_t idx = static_cast<size_t>(it - bound_names.begin());
        if (leg_counts[idx] != u.boxes[b].ports.size()) {
            std::ostringstream os;
            os << "box \"" << u.boxes[b].name << "\" has " << u.boxes[b].ports.size()
               << " ports but its model exposes " << leg_counts[idx] << " legs";
            throw ComposeError(os.str());
        }
    }
}

}  // namespace

Quotient quotient_junctions(const UWD& u, const std::vector<std::vector<int>>& legs_per_box,
                            const std::vector<int>& elements_per_box,
                            const std::vector<std::vector<std::string>>& names_per_box) {
    const int nj = static_cast<int>(u.junctions.size());
    std::vector<int> offset(u.boxes.size(), 0);
    int total = nj;
    for (size_t b = 0; b < u.boxes.size(); ++b) {
        offset[b] = total;
        total += elements_per_box[b];
    }

    UnionFind uf(total);
    for (size_t b = 0; b < u.boxes.size(); ++b)
        for (size_t p = 0; p < u.boxes[b].ports.size(); ++p)
            uf.unite(u.boxes[b].ports[p], offset[b] + legs_per_box[b][p]);

    // Roots appear in global-index order, which is exactly the class order
    // we want: junctions first, then unexposed elements by (box, element).
    std::vector<int> root_to_class(static_cast<size_t>(total), -1);
    Quotient q;
    for (int x = 0; x < total; ++x) {
        const int r = uf.find(x);
        if (root_to_class[static_cast<size_t>(r)] < 0) {
            root_to_class[static_cast<size_t>(r)] = q.class_count++;
            q.class_names.emplace_back();
            q.class_junction.emplace_back(std::nullopt);
        }
    }

    q.junction_class.resize(static_cast<size_t>(nj));
    for (int j = 0; j < nj; ++j) {
        const int c = root_to_class[static_cast<size_t>(uf.find(j))];
        q.junction_class[static_cast<size_t>(j)] = c;
        if (!q.class_junction[static_cast<size_t>(c)])
            q.class_junction[static_cast<size_t>(c)] = j;  // first junction in declaration order
    }
    q.element_class.resize(u.boxes.size());
    for (size_t b = 0; b < u.boxes.size(); ++b) {
        q.element_class[b].resize(static_cast<size_t>(elements_per_box[b]));
        for (int e = 0; e < elements_per_box[b]; ++e)
            q.element_class[b][static_cast<size_t>(e)] =
                root_to_class[static_cast<size_t>(uf.find(offset[b] + e))];
    }

    for (int c = 0; c < q.class_count; ++c) {
        if (q.class_junction[static_cast<size_t>(c)]) {
            q.class_names[static_cast<size_t>(c)] =
                u.junctions[static_cast<size_t>(*q.class_junction[static_cast<size_t>(c)])].name;
        }
    }
    for (size_t b = 0; b < u.boxes.size(); ++b)
        for (size_t e = 0; e < q.element_class[b].size(); ++e) {
            const int c = q.element_class[b][e];
            if (q.class_names[static_cast<size_t>(c)].empty())
                q.class_names[static_cast<size_t>(c)] = u.boxes[b].name + "." + names_per_box[b][e];
        }
    dedup_names(q.class_names);

    q.outer_classes.reserve(u.outer_ports.size());
    for (int j : u.outer_ports) q.outer_classes.push_back(q.junction_class[static_cast<size_t>(j)]);
    return q;
}

namespace {

// Ordered view of a binding following box declaration order.
template <typename T>
std::vector<const T*> ordered_binding(const UWD& u, const std::map<std::string, T>& binding) {
    std::vector<std::string> names;
    std::vector<size_t> legs;
    names.reserve(binding.size());
    for (const auto& [name, model] : binding) {
        names.push_back(name);
        legs.push_back(model.legs.size());
    }
    check_binding_shape(u, names, legs);
    std::vector<const T*> out;
    out.reserve(u.boxes.size());
    for (const auto& b : u.boxes) out.push_back(&binding.at(b.name));
    return out;
}

std::vector<std::string> composite_transition_names(const UWD& u,
                                                    const std::vector<const PetriNet*>& nets) {
    std::map<std::string, int> occurrences;
    for (const auto* n : nets)
        for (const auto& t : n->transitions) ++occurrences[t.name];
    std::vector<std::string> names;
    for (size_t b = 0; b < nets.size(); ++b)
        for (const auto& t : nets[b]->transitions)
            names.push_back(occurrences[t.name] > 1 ? u.boxes[b].name + "." + t.name : t.name);
    dedup_names(names);
    return names;
}

}  // namespace

OpenPetriNet oapply(const UWD& u, const Binding& binding) {
    {
        auto uv = validate_uwd(u);
        if (!uv.empty()) throw ComposeError("invalid UWD: " + uv.front());
    }
    auto models = ordered_binding(u, binding);
    for (size_t b = 0; b < models.size(); ++b) {
        auto v = validate_open_net(*models[b]);
        if (!v.empty())
            throw ComposeError("model bound to box \"" + u.boxes[b].name + "\" is invalid: " + v.front());
    }

    std::vector<std::vector<int>> legs;
    std::vector<int> sizes;
    std::vector<std::vector<std::string>> names;
    for (const auto* m : models) {
        legs.push_back(m->legs);
        sizes.push_back(static_cast<int>(m->net.species.size()));
        std::vector<std::string> sn;
        for (const auto& s : m->net.species) sn.push_back(s.name);
        names.push_back(std::move(sn));
    }
    const Quotient q = quotient_junctions(u, legs, sizes, names);

    OpenPetriNet out;
    for (int c = 0; c < q.class_count; ++c) out.net.add_species(q.class_names[static_cast<size_t>(c)]);

    std::vector<const PetriNet*> nets;
    for (const auto* m : models) nets.push_back(&m->net);
    const auto tnames = composite_transition_names(u, nets);

    size_t tn = 0;
    std::vector<int> toffset(models.size(), 0);
    for (size_t b = 0; b < models.size(); ++b) {
        toffset[b] = static_cast<int>(out.net.transitions.size());
        for (const auto& t : nets[b]->transitions)
            out.net.transitions.push_back({tnames[tn++], t.rate});
        for (const auto& a : nets[b]->inputs)
            out.net.inputs.push_back(
                {q.element_class[b][static_cast<size_t>(a.species)], toffset[b] + a.transition});
        for (const auto& a : nets[b]->outputs)
            out.net.outputs.push_back(
                {q.element_class[b][static_cast<size_t>(a.species)], toffset[b] + a.transition});
    }
    out.legs = q.outer_classes;
    return out;
}

OpenTypedPetriNet oapply_typed(const UWD& u, const TypedBinding& binding, const PetriNet& type_net) {
    Binding plain;
    for (const auto& [name, m] : binding) {
        if (!same_presentation(m.typed.type_net(), type_net))
            throw ComposeError("model bound to box \"" + name +
                               "\" is typed by a different type net presentation");
        auto tv = validate_typed_net(m.typed);
        if (!tv.empty())
            throw ComposeError("model bound to box \"" + name + "\" has an invalid typing: " + tv.front());
        plain[name] = OpenPetriNet{m.typed.net(), m.legs};
    }

    OpenPetriNet composite = oapply(u, plain);

    // Recompute the quotient to relate composite species back to components.
    std::vector<std::vector<int>> legs;
    std::vector<int> sizes;
    std::vector<std::vector<std::string>> names;
    std::vector<const OpenTypedPetriNet*> models;
    for (const auto& b : u.boxes) models.push_back(&binding.at(b.name));
    for (const auto* m : models) {
        legs.push_back(m->legs);
        sizes.push_back(static_cast<int>(m->typed.net().species.size()));
        std::vector<std::string> sn;
        for (const auto& s : m->typed.net().species) sn.push_back(s.name);
        names.push_back(std::move(sn));
    }
    const Quotient q = quotient_junctions(u, legs, sizes, names);

    std::vector<int> class_type(static_cast<size_t>(q.class_count), -1);
    for (size_t b = 0; b < models.size(); ++b) {
        const auto& smap = models[b]->typed.typing.species_map;
        for (size_t s = 0; s < smap.size(); ++s) {
            const int c = q.element_class[b][s];
            if (class_type[static_cast<size_t>(c)] < 0) {
                class_type[static_cast<size_t>(c)] = smap[s];
            } else if (class_type[static_cast<size_t>(c)] != smap[s]) {
                const auto junction = q.class_junction[static_cast<size_t>(c)]
                                          ? u.junctions[static_cast<size_t>(
                                                            *q.class_junction[static_cast<size_t>(c)])]
                                                .name
                                          : q.class_names[static_cast<size_t>(c)];
                throw TypeClashError(
                    junction,
                    type_net.species[static_cast<size_t>(class_type[static_cast<size_t>(c)])].name,
                    type_net.species[static_cast<size_t>(smap[s])].name);
            }
        }
    }
    for (int c = 0; c < q.class_count; ++c)
        if (class_type[static_cast<size_t>(c)] < 0)
            throw ComposeError("junction \"" + q.class_names[static_cast<size_t>(c)] +
                               "\" is wired to no port, so its type cannot be determined");

    PetriMorphism typing;
    typing.dom = composite.net;
    typing.cod = type_net;
    typing.species_map.assign(class_type.begin(), class_type.end());
    for (const auto* m : models) {
        const auto& tm = m->typed.typing;
        typing.transition_map.insert(typing.transition_map.end(), tm.transition_map.begin(),
                                     tm.transition_map.end());
        typing.input_map.insert(typing.input_map.end(), tm.input_map.begin(), tm.input_map.end());
        typing.output_map.insert(typing.output_map.end(), tm.output_map.begin(), tm.output_map.end());
    }

    OpenTypedPetriNet out{TypedPetriNet{std::move(typing)}, composite.legs};
    auto v = validate_typed_net(out.typed);
    if (!v.empty()) throw Error("internal: composite typing is invalid: " + v.front());
    return out;
}

}  // namespace opetri
