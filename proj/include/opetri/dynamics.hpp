#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "opetri/compose.hpp"
#include "opetri/petri.hpp"

namespace opetri {

/// State of the system at an earlier time, written into `out` (length =
/// state dimension). Solvers provide this; vector fields only read it.
using HistoryFn = std::function<void(double t, std::span<double> out)>;

/// A (possibly delayed) vector field on R^dim. `delays` lists the fixed
/// lags the field may look back by; an empty list with `delay_capable`
/// false is a plain ODE whose eval never touches the history argument.
struct VectorField {
    int dim = 0;
    std::function<void(double t, std::span<const double> u, const HistoryFn& history,
                       std::span<double> du)>
        eval;
    std::vector<double> delays;
    std::vector<std::string> var_names;
    /// True for genuine delay fields and for ODEs coerced via ode_to_dde;
    /// such values are accepted wherever delay components are expected.
    bool delay_capable = false;

    void operator()(double t, std::span<const double> u, const HistoryFn& history,
                    std::span<double> du) const {
        eval(t, u, history, du);
    }
};

/// A vector field with an interface: `legs[i]` is the state variable
/// exposed through the i-th foot.
struct OpenDynamics {
    VectorField field;
    std::vector<int> legs;
};

/// Compiles a Petri net to its mass-action vector field: each transition
/// fires at rate beta * product of its input concentrations (with input
/// multiplicity), consuming one token per input arc and producing one per
/// output arc.
VectorField mass_action(const PetriNet& net);

OpenDynamics petri_to_open_dynamics(const OpenPetriNet& m);

using DynamicsBinding = std::map<std::string, OpenDynamics>;

/// Composes dynamical components over a wiring diagram: variables wired to
/// a common junction are identified and their rates of change are summed.
/// Variable order and naming follow the same quotient as oapply, so
/// compiling Petri nets before or after composition gives the same field.
///
/// Components with nonempty delays may only be combined with other
/// delay-capable components; coerce plain ODEs with ode_to_dde first.
OpenDynamics compose_dynamics(const UWD& u, const DynamicsBinding& binding);

/// Reinterprets an ODE component as a delay component with trivial history
/// dependence. Errors if the input already has delays.
OpenDynamics ode_to_dde(const OpenDynamics& d);

/// Built-in component registry. Ships the Ross-Macdonald submodels:
///
///   rm_host       params {r}                vars [I_H]       dI_H = -r I_H
///   rm_vector     params {g}                vars [I_V]       dI_V = -g I_V
///   rm_bloodmeal  params {a,b,c,H,V}        vars [I_H, I_V]
///       dI_H = a b (I_V/H) (H - I_H),  dI_V = a c (I_H/H) (V - I_V)
///   rm_bloodmeal_delay  params {a,b,c,H,V,tau}
///       as rm_bloodmeal with the vector-infection term read at t - tau
///       (a reconstruction whose tau = 0 limit is rm_bloodmeal exactly)
///
/// a is the biting rate, b and c the infection efficacies for hosts and
/// vectors, r the host recovery rate, g the vector mortality rate, H and V
/// the total host and vector populations.
OpenDynamics make_component(const std::string& name, const std::map<std::string, double>& params);

std::vector<std::string> component_names();

}  // namespace opetri
