#pragma once

#include <string>

// Single-header nlohmann/json, vendored as json.hpp.
#include <json.hpp>

#include "opetri/analyze.hpp"
#include "opetri/compose.hpp"
#include "opetri/petri.hpp"
#include "opetri/solve.hpp"
#include "opetri/stratify.hpp"

namespace opetri {

/// Malformed document: wrong type, missing key, bad index arrays.
struct SchemaError : Error {
    using Error::Error;
};

nlohmann::json net_to_json(const PetriNet& net);
PetriNet net_from_json(const nlohmann::json& j);

nlohmann::json open_net_to_json(const OpenPetriNet& m);
OpenPetriNet open_net_from_json(const nlohmann::json& j);

nlohmann::json typed_net_to_json(const TypedPetriNet& tp);
TypedPetriNet typed_net_from_json(const nlohmann::json& j);

nlohmann::json open_typed_net_to_json(const OpenTypedPetriNet& m);
OpenTypedPetriNet open_typed_net_from_json(const nlohmann::json& j);

nlohmann::json uwd_to_json(const UWD& u);
UWD uwd_from_json(const nlohmann::json& j);

/// Stratified result: a typed net plus projections and provenance.
nlohmann::json stratified_to_json(const StratifiedNet& s);

nlohmann::json fit_result_to_json(const FitResult& r);
nlohmann::json sensitivities_to_json(const std::map<std::string, double>& sens);

SolveConfig solve_config_from_json(const nlohmann::json& j);
FitSpec fit_spec_from_json(const nlohmann::json& j);
OutcomeSpec outcome_spec_from_json(const nlohmann::json& j);

/// Dataset CSV: header "t,<name>,...", one row per time, blank cells are
/// missing observations.
Dataset dataset_from_csv(const std::string& text);
std::string dataset_to_csv(const Dataset& data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace opetri
