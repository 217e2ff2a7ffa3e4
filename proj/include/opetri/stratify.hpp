#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "opetri/petri.hpp"

namespace opetri {

struct TypeNetMismatchError : Error {
    using Error::Error;
};

/// The pullback of two typed Petri nets over a common type net, together
/// with the projections onto the factors and per-element provenance.
struct StratifiedNet {
    TypedPetriNet result;
    PetriMorphism proj_left;   // result.net() -> left factor
    PetriMorphism proj_right;  // result.net() -> right factor
    std::vector<std::pair<int, int>> species_pairs;
    std::vector<std::pair<int, int>> transition_pairs;
    std::vector<std::pair<int, int>> input_pairs;
    std::vector<std::pair<int, int>> output_pairs;
};

/// Stratifies `a` by `b`: the result pairs every same-typed species,
/// transition, and arc of the two factors, with source/target maps taken
/// componentwise. Pairs are ordered lexicographically by (left index,
/// right index) and named "(leftname, rightname)".
///
/// The rate of a paired transition is the product of the factor rates.
/// Nothing in the stratification itself dictates this; the product is the
/// simplest bilinear choice and calibration is expected to override it.
///
/// The two typings must target the same type-net presentation (compared
/// structurally, not up to isomorphism); otherwise TypeNetMismatchError.
StratifiedNet pullback(const TypedPetriNet& a, const TypedPetriNet& b);

/// Deterministic fill colors keyed by name, encoding each element's type.
struct TypingColors {
    std::map<std::string, std::string> species_fill;
    std::map<std::string, std::string> transition_fill;
};

TypingColors typing_colors(const TypedPetriNet& tp);

struct StratifyExport {
    StratifiedNet strat;
    std::string left_dot;
    std::string right_dot;
    std::string result_dot;
};

/// Pullback plus DOT renderings of both factors and the result, all
/// colored by their typing into the shared type net.
StratifyExport stratify_and_project(const TypedPetriNet& a, const TypedPetriNet& b);

}  // namespace opetri
