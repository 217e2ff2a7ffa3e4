#pragma once

#include <string>
#include <utility>
#include <vector>

#include "opetri/compose.hpp"
#include "opetri/petri.hpp"

namespace opetri::fixtures {

/// Builds a typing from per-species and per-transition type assignments.
/// Arc maps are derived: within each transition, every arc is matched to
/// the first unused type arc carrying the same species type, falling back
/// to any unused arc. With `allow_invalid` false the result must validate;
/// with it true a best-effort (possibly violating) typing is returned,
/// which is how deliberately ill-typed models are written down.
TypedPetriNet typed_by(const PetriNet& net, const PetriNet& type_net,
                       const std::vector<int>& species_types,
                       const std::vector<int>& transition_types, bool allow_invalid = false);

/// The plain susceptible/infected/recovered net: infection S + I -> 2I and
/// recovery I -> R.
PetriNet sir();

/// Type system for infectious-disease models: one population type and
/// three transition types, in this order: disease (a spontaneous change of
/// infection status), strata (a spontaneous change of stratum), interact
/// (a pairwise interaction).
PetriNet p_infectious();
inline constexpr int kTypeDisease = 0;
inline constexpr int kTypeStrata = 1;
inline constexpr int kTypeInteract = 2;

/// Type system for vector-borne models: host and vector population types;
/// hosts and vectors change status on their own, interactions always
/// involve one host and one vector.
PetriNet p_vector_borne();

/// SIR extended with a strata self-loop on each species; typed by
/// p_infectious. The self-loops are what stratification schemes pair
/// their movement transitions with.
TypedPetriNet sir_typed();

/// SIS with strata self-loops, typed by p_infectious.
TypedPetriNet sis_typed();

/// Quarantine stratification scheme: quarantining (Q) and free-living
/// (~Q) strata, entering/leaving quarantine, disease self-loops in both
/// strata, and interaction only among the non-quarantining.
TypedPetriNet quarantine_typed();

/// Age stratification scheme on children/adults: interactions between all
/// ordered pairs, disease self-loops, and no strata changes (nobody
/// spontaneously changes age group).
TypedPetriNet age_typed();

/// Two-patch flux scheme: movement between patches, interaction and
/// disease self-loops within each patch.
TypedPetriNet flux2_typed();

/// Two-patch simple-trip scheme: populations keyed by (current patch,
/// residence patch), travel that preserves residence, interaction between
/// co-located pairs, disease self-loops.
TypedPetriNet simple_trip_typed();

/// Hand-encoded SVIIvR compartmental model (vaccination + two infection
/// pools), and its typing by p_infectious.
PetriNet sviivr();
TypedPetriNet sviivr_typed();

/// Valid SIS host/vector model typed by p_vector_borne.
TypedPetriNet sis_vector_valid();

/// The same model extended with two transitions no typing can admit:
/// hosts turning into vectors, and vector-to-vector infection. The
/// returned typing is the best effort, so validation reports exactly the
/// offending transitions.
TypedPetriNet sis_vector_forbidden();

/// The three components of the vaccination composite: an SIR model for the
/// unvaccinated, a VIvR model for the vaccinated, and the cross-exposure
/// model carrying vaccination and cross-infections. Leg order matches the
/// epi wiring below.
OpenPetriNet fig2_sir_open();
OpenPetriNet fig2_viv_open();
OpenPetriNet fig2_cross_open();
OpenTypedPetriNet fig2_sir_typed_open();
OpenTypedPetriNet fig2_viv_typed_open();
OpenTypedPetriNet fig2_cross_typed_open();

/// Wiring for the vaccination composite (boxes sir, viv, cross).
std::string epi_uwd_source();

/// Wiring for the vector-borne composite (boxes host, vector, bloodmeal).
std::string malaria_uwd_source();

/// Every shipped model typed by p_infectious, keyed by fixture name.
std::vector<std::pair<std::string, TypedPetriNet>> infectious_palette();

/// Writes the whole corpus (net/typed-net/open-net JSON, .uwd sources, a
/// synthetic SIR dataset, and a project file tying them together) into
/// `dir`, creating it if needed.
void write_fixture_corpus(const std::string& dir);

}  // namespace opetri::fixtures
