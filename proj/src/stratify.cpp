#include "opetri/stratify.hpp"

#include <algorithm>
#include <sstream>

namespace opetri {

namespace {

// Both typings come in validated; violations here are internal errors.
void require_valid(const TypedPetriNet& tp, const char* which) {
    auto v = validate_typed_net(tp);
    if (!v.empty()) throw Error(std::string("pullback: ") + which + " factor is invalid: " + v.front());
}

int pair_index(const std::vector<std::pair<int, int>>& pairs, int l, int r) {
    const auto it = std::lower_bound(pairs.begin(), pairs.end(), std::make_pair(l, r));
    if (it == pairs.end() || *it != std::make_pair(l, r))
        throw Error("internal: pullback pairing is missing an element");
    return static_cast<int>(it - pairs.begin());
}

}  // namespace

StratifiedNet pullback(const TypedPetriNet& a, const TypedPetriNet& b) {
    if (!same_presentation(a.type_net(), b.type_net()))
        throw TypeNetMismatchError(
            "pullback: the two typings target different type net presentations");
    require_valid(a, "left");
    require_valid(b, "right");

    const PetriNet& pa = a.net();
    const PetriNet& pb = b.net();
    StratifiedNet out;

    for (size_t i = 0; i < pa.species.size(); ++i)
        for (size_t j = 0; j < pb.species.size(); ++j)
            if (a.typing.species_map[i] == b.typing.species_map[j])
                out.species_pairs.push_back({static_cast<int>(i), static_cast<int>(j)});
    for (size_t i = 0; i < pa.transitions.size(); ++i)
        for (size_t j = 0; j < pb.transitions.size(); ++j)
            if (a.typing.transition_map[i] == b.typing.transition_map[j])
                out.transition_pairs.push_back({static_cast<int>(i), static_cast<int>(j)});
    for (size_t i = 0; i < pa.inputs.size(); ++i)
        for (size_t j = 0; j < pb.inputs.size(); ++j)
            if (a.typing.input_map[i] == b.typing.input_map[j])
                out.input_pairs.push_back({static_cast<int>(i), static_cast<int>(j)});
    for (size_t i = 0; i < pa.outputs.size(); ++i)
        for (size_t j = 0; j < pb.outputs.size(); ++j)
            if (a.typing.output_map[i] == b.typing.output_map[j])
                out.output_pairs.push_back({static_cast<int>(i), static_cast<int>(j)});

    PetriNet net;
    for (const auto& [l, r] : out.species_pairs)
        net.add_species("(" + pa.species[static_cast<size_t>(l)].name + ", " +
                        pb.species[static_cast<size_t>(r)].name + ")");
    for (const auto& [l, r] : out.transition_pairs)
        net.transitions.push_back({"(" + pa.transitions[static_cast<size_t>(l)].name + ", " +
                                       pb.transitions[static_cast<size_t>(r)].name + ")",
                                   pa.transitions[static_cast<size_t>(l)].rate *
                                       pb.transitions[static_cast<size_t>(r)].rate});
    for (const auto& [l, r] : out.input_pairs) {
        const auto& al = pa.inputs[static_cast<size_t>(l)];
        const auto& ar = pb.inputs[static_cast<size_t>(r)];
        net.inputs.push_back({pair_index(out.species_pairs, al.species, ar.species),
                              pair_index(out.transition_pairs, al.transition, ar.transition)});
    }
    for (const auto& [l, r] : out.output_pairs) {
        const auto& al = pa.outputs[static_cast<size_t>(l)];
        const auto& ar = pb.outputs[static_cast<size_t>(r)];
        net.outputs.push_back({pair_index(out.species_pairs, al.species, ar.species),
                               pair_index(out.transition_pairs, al.transition, ar.transition)});
    }

    auto first_of = [](const std::vector<std::pair<int, int>>& ps) {
        std::vector<int> v;
        v.reserve(ps.size());
        for (const auto& p : ps) v.push_back(p.first);
        return v;
    };
    auto second_of = [](const std::vector<std::pair<int, int>>& ps) {
        std::vector<int> v;
        v.reserve(ps.size());
        for (const auto& p : ps) v.push_back(p.second);
        return v;
    };

    out.proj_left = PetriMorphism{net, pa, first_of(out.species_pairs), first_of(out.transition_pairs),
                                  first_of(out.input_pairs), first_of(out.output_pairs)};
    out.proj_right =
        PetriMorphism{net, pb, second_of(out.species_pairs), second_of(out.transition_pairs),
                      second_of(out.input_pairs), second_of(out.output_pairs)};
    out.result.typing = compose_morphisms(out.proj_left, a.typing);

    // Consistency of the construction: both projection routes induce the
    // same typing, the projections are honest morphisms, and each paired
    // transition keeps the arity of its type transition.
    {
        const auto via_right = compose_morphisms(out.proj_right, b.typing);
        if (out.result.typing.species_map != via_right.species_map ||
            out.result.typing.transition_map != via_right.transition_map ||
            out.result.typing.input_map != via_right.input_map ||
            out.result.typing.output_map != via_right.output_map)
            throw Error("internal: pullback typing differs between the two projection routes");
        if (!validate_morphism(out.proj_left).empty() || !validate_morphism(out.proj_right).empty())
            throw Error("internal: pullback projection is not a morphism");
        if (!validate_typed_net(out.result).empty())
            throw Error("internal: pullback typing is not a morphism");
    }
    return out;
}

TypingColors typing_colors(const TypedPetriNet& tp) {
    // A small qualitative palette, cycled by type index.
    static const std::vector<std::string> palette = {"#ffd92f", "#8da0cb", "#a883bf", "#66c2a5",
                                                     "#fc8d62", "#e78ac3", "#a6d854", "#b3b3b3"};
    TypingColors colors;
    const auto& net = tp.net();
    for (size_t s = 0; s < net.species.size(); ++s)
        colors.species_fill[net.species[s].name] =
            palette[static_cast<size_t>(tp.typing.species_map[s]) % palette.size()];
    for (size_t t = 0; t < net.transitions.size(); ++t)
        colors.transition_fill[net.transitions[t].name] =
            palette[static_cast<size_t>(tp.typing.transition_map[t]) % palette.size()];
    return colors;
}

StratifyExport stratify_and_project(const TypedPetriNet& a, const TypedPetriNet& b) {
    StratifyExport ex;
    ex.strat = pullback(a, b);
    auto render = [](const TypedPetriNet& tp, const std::string& name) {
        const TypingColors c = typing_colors(tp);
        DotOptions opts;
        opts.graph_name = name;
        opts.species_fill = c.species_fill;
        opts.transition_fill = c.transition_fill;
        opts.comments = {"fill colors encode the typing into the shared type net"};
        return to_dot(tp.net(), opts);
    };
    ex.left_dot = render(a, "left_factor");
    ex.right_dot = render(b, "right_factor");
    ex.result_dot = render(ex.strat.result, "stratified");
    return ex;
}

}  // namespace opetri
