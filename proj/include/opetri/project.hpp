#pragma once

#include <map>
#include <string>
#include <vector>

#include "opetri/analyze.hpp"
#include "opetri/compose.hpp"
#include "opetri/dynamics.hpp"
#include "opetri/json_io.hpp"
#include "opetri/solve.hpp"

namespace opetri {

/// A project document binding names to resources: nets, open nets, typed
/// nets, wiring diagrams, dynamics instantiations, datasets, initial
/// states, solver configs, and analysis specs. Resource values may be
/// inline JSON or a path (relative to the project file) to a .json/.uwd/
/// .csv file. Everything is loaded and schema-checked eagerly so dangling
/// references fail at load time, not mid-pipeline.
class Project {
  public:
    static Project load(const std::string& path);

    const PetriNet& net(const std::string& name) const;
    const OpenPetriNet& open_net(const std::string& name) const;
    const TypedPetriNet& typed_net(const std::string& name) const;
    const OpenTypedPetriNet& open_typed_net(const std::string& name) const;
    const UWD& uwd(const std::string& name) const;
    /// Dynamics are built on demand (compositions resolve their binding).
    OpenDynamics dynamics(const std::string& name) const;
    bool has_dynamics(const std::string& name) const;
    const Dataset& dataset(const std::string& name) const;
    const std::map<std::string, double>& state(const std::string& name) const;
    SolveConfig solve_config(const std::string& name) const;
    const FitSpec& fit_spec(const std::string& name) const;
    const OutcomeSpec& outcome_spec(const std::string& name) const;

    std::vector<std::string> net_names() const;

    bool has_net(const std::string& name) const { return nets_.count(name) > 0; }
    bool has_open_net(const std::string& name) const { return open_nets_.count(name) > 0; }
    bool has_typed_net(const std::string& name) const { return typed_nets_.count(name) > 0; }
    bool has_open_typed_net(const std::string& name) const {
        return open_typed_nets_.count(name) > 0;
    }
    bool has_uwd(const std::string& name) const { return uwds_.count(name) > 0; }

  private:
    struct DynamicsSpec {
        std::string component;                  // registry entry, or
        std::string compose_uwd;                // a composition over this diagram
        std::map<std::string, std::string> binding;  // box -> dynamics resource
        std::map<std::string, double> params;
        bool coerce_dde = false;
    };

    std::map<std::string, PetriNet> nets_;
    std::map<std::string, OpenPetriNet> open_nets_;
    std::map<std::string, TypedPetriNet> typed_nets_;
    std::map<std::string, OpenTypedPetriNet> open_typed_nets_;
    std::map<std::string, UWD> uwds_;
    std::map<std::string, DynamicsSpec> dynamics_;
    std::map<std::string, Dataset> datasets_;
    std::map<std::string, std::map<std::string, double>> states_;
    std::map<std::string, SolveConfig> solve_configs_;
    std::map<std::string, FitSpec> fit_specs_;
    std::map<std::string, OutcomeSpec> outcome_specs_;

    OpenDynamics build_dynamics(const std::string& name, std::vector<std::string>& chain) const;
};

}  // namespace opetri
