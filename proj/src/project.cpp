#include "opetri/project.hpp"

#include <algorithm>
#include <filesystem>

#include "opetri/uwd_dsl.hpp"

namespace opetri {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json load_value(const json& value, const fs::path& base, const char* kind) {
    if (value.is_string()) {
        const fs::path p = base / value.get<std::string>();
        json out;
        try {
            out = json::parse(read_file(p.string()));
        } catch (const json::parse_error& e) {
            throw SchemaError(std::string(kind) + " file \"" + p.string() +
                              "\": " + std::string(e.what()));
        }
        return out;
    }
    return value;
}

template <typename T, typename F>
void load_section(const json& doc, const char* key, F parse, std::map<std::string, T>& into) {
    if (!doc.contains(key)) return;
    const auto& section = doc.at(key);
    if (!section.is_object()) throw SchemaError(std::string("project: \"") + key + "\" must map names to resources");
    for (const auto& [name, value] : section.items()) {
        try {
            into[name] = parse(value);
        } catch (const Error& e) {
            throw SchemaError("project resource \"" + name + "\": " + e.what());
        }
    }
}

template <typename T>
const T& find_resource(const std::map<std::string, T>& m, const std::string& name,
                       const char* kind) {
    auto it = m.find(name);
    if (it == m.end())
        throw Error(std::string("no ") + kind + " named \"" + name + "\" in the project");
    return it->second;
}

}  // namespace

Project Project::load(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw SchemaError("project file \"" + path + "\": " + std::string(e.what()));
    }
    if (!doc.is_object()) throw SchemaError("project file: expected a JSON object");
    const fs::path base = fs::path(path).parent_path();

    Project p;
    load_section<PetriNet>(doc, "nets",
                           [&](const json& v) { return net_from_json(load_value(v, base, "net")); },
                           p.nets_);
    load_section<OpenPetriNet>(
        doc, "open_nets",
        [&](const json& v) { return open_net_from_json(load_value(v, base, "open net")); },
        p.open_nets_);
    load_section<TypedPetriNet>(
        doc, "typed_nets",
        [&](const json& v) { return typed_net_from_json(load_value(v, base, "typed net")); },
        p.typed_nets_);
    load_section<OpenTypedPetriNet>(
        doc, "open_typed_nets",
        [&](const json& v) { return open_typed_net_from_json(load_value(v, base, "open typed net")); },
        p.open_typed_nets_);
    load_section<UWD>(doc, "uwds",
                      [&](const json& v) {
                          if (v.is_string() && v.get<std::string>().ends_with(".uwd")) {
                              const fs::path f = base / v.get<std::string>();
                              return parse_uwd(read_file(f.string())).uwd;
                          }
                          return uwd_from_json(load_value(v, base, "uwd"));
                      },
                      p.uwds_);
    load_section<Dataset>(doc, "datasets",
                          [&](const json& v) {
                              if (!v.is_string())
                                  throw SchemaError("datasets must be CSV file paths");
                              const fs::path f = base / v.get<std::string>();
                              return dataset_from_csv(read_file(f.string()));
                          },
                          p.datasets_);
    load_section<std::map<std::string, double>>(
        doc, "states",
        [&](const json& v) {
            const json j = load_value(v, base, "state");
            if (!j.is_object()) throw SchemaError("state: expected a name -> value object");
            std::map<std::string, double> out;
            for (const auto& [var, val] : j.items()) {
                if (!val.is_number()) throw SchemaError("state: \"" + var + "\" must be a number");
                out[var] = val.get<double>();
            }
            return out;
        },
        p.states_);
    load_section<SolveConfig>(
        doc, "solve_configs",
        [&](const json& v) { return solve_config_from_json(load_value(v, base, "solve config")); },
        p.solve_configs_);
    load_section<FitSpec>(
        doc, "fit_specs",
        [&](const json& v) { return fit_spec_from_json(load_value(v, base, "fit spec")); },
        p.fit_specs_);
    load_section<OutcomeSpec>(
        doc, "outcome_specs",
        [&](const json& v) { return outcome_spec_from_json(load_value(v, base, "outcome spec")); },
        p.outcome_specs_);

    load_section<DynamicsSpec>(
        doc, "dynamics",
        [&](const json& v) {
            const json j = load_value(v, base, "dynamics");
            DynamicsSpec spec;
            if (j.contains("component")) {
                spec.component = j.at("component").get<std::string>();
                if (j.contains("params"))
                    for (const auto& [key, val] : j.at("params").items())
                        spec.params[key] = val.get<double>();
                if (j.contains("coerce_dde")) spec.coerce_dde = j.at("coerce_dde").get<bool>();
            } else if (j.contains("compose")) {
                const auto& c = j.at("compose");
                spec.compose_uwd = c.at("uwd").get<std::string>();
                for (const auto& [box, res] : c.at("binding").items())
                    spec.binding[box] = res.get<std::string>();
            } else {
                throw SchemaError("dynamics: expected \"component\" or \"compose\"");
            }
            return spec;
        },
        p.dynamics_);

    // Cross-reference checks: compositions must name known diagrams and
    // dynamics, and must not be cyclic.
    for (const auto& [name, spec] : p.dynamics_) {
        if (!spec.compose_uwd.empty() && !p.uwds_.count(spec.compose_uwd))
            throw SchemaError("dynamics \"" + name + "\": unknown uwd \"" + spec.compose_uwd + "\"");
        for (const auto& [box, res] : spec.binding) {
            (void)box;
            if (!p.dynamics_.count(res))
                throw SchemaError("dynamics \"" + name + "\": unknown dynamics resource \"" + res +
                                  "\"");
        }
    }
    for (const auto& [name, spec] : p.dynamics_) {
        (void)spec;
        std::vector<std::string> chain;
        p.build_dynamics(name, chain);  // throws on cycles or bad components
    }
    return p;
}

OpenDynamics Project::build_dynamics(const std::string& name, std::vector<std::string>& chain) const {
    if (std::find(chain.begin(), chain.end(), name) != chain.end())
        throw SchemaError("dynamics \"" + name + "\" is defined in terms of itself");
    chain.push_back(name);
    const auto& spec = find_resource(dynamics_, name, "dynamics");
    OpenDynamics d;
    if (!spec.component.empty()) {
        d = make_component(spec.component, spec.params);
        if (spec.coerce_dde) d = ode_to_dde(d);
    } else {
        DynamicsBinding binding;
        for (const auto& [box, res] : spec.binding) binding[box] = build_dynamics(res, chain);
        d = compose_dynamics(uwd(spec.compose_uwd), binding);
    }
    chain.pop_back();
    return d;
}

const PetriNet& Project::net(const std::string& name) const {
    return find_resource(nets_, name, "net");
}
const OpenPetriNet& Project::open_net(const std::string& name) const {
    return find_resource(open_nets_, name, "open net");
}
const TypedPetriNet& Project::typed_net(const std::string& name) const {
    return find_resource(typed_nets_, name, "typed net");
}
const OpenTypedPetriNet& Project::open_typed_net(const std::string& name) const {
    return find_resource(open_typed_nets_, name, "open typed net");
}
const UWD& Project::uwd(const std::string& name) const {
    return find_resource(uwds_, name, "uwd");
}
OpenDynamics Project::dynamics(const std::string& name) const {
    std::vector<std::string> chain;
    return build_dynamics(name, chain);
}
bool Project::has_dynamics(const std::string& name) const { return dynamics_.count(name) > 0; }
const Dataset& Project::dataset(const std::string& name) const {
    return find_resource(datasets_, name, "dataset");
}
const std::map<std::string, double>& Project::state(const std::string& name) const {
    return find_resource(states_, name, "state");
}
SolveConfig Project::solve_config(const std::string& name) const {
    return find_resource(solve_configs_, name, "solve config");
}
const FitSpec& Project::fit_spec(const std::string& name) const {
    return find_resource(fit_specs_, name, "fit spec");
}
const OutcomeSpec& Project::outcome_spec(const std::string& name) const {
    return find_resource(outcome_specs_, name, "outcome spec");
}

std::vector<std::string> Project::net_names() const {
    std::vector<std::string> out;
    for (const auto& [name, net] : nets_) {
        (void)net;
        out.push_back(name);
    }
    return out;
}

}  // namespace opetri
