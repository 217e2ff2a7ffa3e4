#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace opetri {

/// Base class for all domain errors thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when an isomorphism search visits more nodes than allowed.
struct SearchLimitError : Error {
    using Error::Error;
};

struct SpeciesRec {
    std::string name;
};

struct TransitionRec {
    std::string name;
    double rate = 0.0;
};

/// An input arc connects a source species to the transition that consumes it.
struct InputArc {
    int species = 0;
    int transition = 0;
};

/// An output arc connects the transition that produces to the target species.
struct OutputArc {
    int species = 0;
    int transition = 0;
};

/// A Petri net presented by four finite sets: species, transitions, input
/// arcs, and output arcs. Arcs are kept as ordered lists, so multiplicities
/// are expressed by repetition (two identical output arcs mean the
/// transition produces two tokens of that species).
///
/// Rate constants live on transitions so the net can be compiled to
/// mass-action kinetics; structural operations (morphisms, isomorphism,
/// pullbacks) ignore them. Names are presentation metadata: structural
/// identity is always up to isomorphism, never by name.
struct PetriNet {
    std::vector<SpeciesRec> species;
    std::vector<TransitionRec> transitions;
    std::vector<InputArc> inputs;
    std::vector<OutputArc> outputs;

    int add_species(std::string name);

    /// Adds a transition together with one input arc per entry of
    /// `in_species` and one output arc per entry of `out_species`.
    int add_transition(std::string name, double rate,
                       const std::vector<int>& in_species,
                       const std::vector<int>& out_species);

    std::optional<int> species_index(const std::string& name) const;
    std::optional<int> transition_index(const std::string& name) const;

    /// Species index of every input arc of transition t, in arc order.
    std::vector<int> transition_inputs(int t) const;
    std::vector<int> transition_outputs(int t) const;

    std::map<std::string, double> rate_map() const;
};

/// Shape equality of two presentations: same set sizes and identical arc
/// lists (same order, same endpoints). Names and rates are ignored.
bool same_presentation(const PetriNet& a, const PetriNet& b);

/// A map of Petri nets: four index maps sending species, transitions and
/// arcs of `dom` into `cod`. A valid morphism commutes with the arc
/// source/target functions and restricts to a bijection between the input
/// (resp. output) arcs of each dom transition and those of its image, so
/// arities are preserved exactly.
struct PetriMorphism {
    PetriNet dom;
    PetriNet cod;
    std::vector<int> species_map;
    std::vector<int> transition_map;
    std::vector<int> input_map;
    std::vector<int> output_map;
};

PetriMorphism identity_morphism(const PetriNet& net);

/// Componentwise composition g after f. Requires f.cod and g.dom to be the
/// same presentation.
PetriMorphism compose_morphisms(const PetriMorphism& f, const PetriMorphism& g);

/// Returns every well-formedness violation: out-of-range arc endpoints,
/// duplicate species or transition names, non-finite or negative rates.
/// Empty result means the net is valid.
std::vector<std::string> validate_net(const PetriNet& net);

/// Returns every violation of the morphism laws: map length or range
/// errors, failed commuting squares, and per-transition arc restrictions
/// that are not bijections. Violations name the transitions involved.
std::vector<std::string> validate_morphism(const PetriMorphism& f);

/// A model net together with its typing morphism into a type net.
/// The model is the morphism's domain and the type net its codomain, so
/// the three pieces can never disagree.
struct TypedPetriNet {
    PetriMorphism typing;

    const PetriNet& net() const { return typing.dom; }
    const PetriNet& type_net() const { return typing.cod; }
};

std::vector<std::string> validate_typed_net(const TypedPetriNet& tp);

/// True iff every transition has as many input arcs as output arcs, which
/// makes the total population a conserved quantity of the mass-action
/// dynamics.
bool conserves_population(const PetriNet& net);
bool conserves_population(const TypedPetriNet& tp);

struct IsoOptions {
    /// Abort with SearchLimitError after this many search nodes.
    long node_limit = 5'000'000;
};

/// Searches for an isomorphism between two nets: a morphism bijective on
/// species, transitions, input arcs, and output arcs. Names and rates are
/// ignored; only the diagram shape is compared. The search is brute force
/// over species/transition bijections pruned by degree and arc-multiplicity
/// profiles, which is fine for desk-scale nets (tens of species).
std::optional<PetriMorphism> is_isomorphic(const PetriNet& p, const PetriNet& q,
                                           const IsoOptions& opts = {});

struct DotOptions {
    std::string graph_name = "petri";
    /// Per-name fill overrides. Species default to light blue circles and
    /// transitions to orange squares.
    std::map<std::string, std::string> species_fill;
    std::map<std::string, std::string> transition_fill;
    /// Free-form comment lines emitted after the header (used for legends).
    std::vector<std::string> comments;
};

/// Deterministic DOT rendering: circles for species, boxes for transitions,
/// one edge per arc, everything in declaration order.
std::string to_dot(const PetriNet& net, const DotOptions& opts = {});

}  // namespace opetri
