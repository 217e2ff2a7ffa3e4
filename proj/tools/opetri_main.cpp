#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "opetri/analyze.hpp"
#include "opetri/compose.hpp"
#include "opetri/dynamics.hpp"
#include "opetri/fixtures.hpp"
#include "opetri/json_io.hpp"
#include "opetri/project.hpp"
#include "opetri/solve.hpp"
#include "opetri/stratify.hpp"
#include "opetri/uwd_dsl.hpp"

namespace fs = std::filesystem;
using namespace opetri;

namespace {

bool color_enabled() {
    const char* env = std::getenv("OPETRI_COLOR");
    return !(env && std::string(env) == "0");
}

void report_error(const std::string& msg) {
    if (color_enabled())
        std::cerr << "\033[31merror:\033[0m " << msg << "\n";
    else
        std::cerr << "error: " << msg << "\n";
}

fs::path ensure_out_dir(const std::string& out) {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

std::map<std::string, double> rates_from_file(const std::string& path) {
    auto doc = nlohmann::json::parse(read_file(path));
    if (doc.contains("rates")) doc = doc.at("rates");
    if (!doc.is_object()) throw SchemaError("rates file: expected an object of name -> value");
    std::map<std::string, double> rates;
    for (const auto& [name, value] : doc.items()) rates[name] = value.get<double>();
    return rates;
}

PetriNet with_rates(PetriNet net, const std::map<std::string, double>& rates) {
    for (const auto& [name, value] : rates) {
        auto idx = net.transition_index(name);
        if (!idx) throw Error("rates name \"" + name + "\" which is not a transition");
        net.transitions[static_cast<size_t>(*idx)].rate = value;
    }
    return net;
}

std::vector<double> state_vector(const std::map<std::string, double>& state,
                                 const std::vector<std::string>& var_names) {
    std::vector<double> u0(var_names.size(), 0.0);
    std::set<std::string> known(var_names.begin(), var_names.end());
    for (const auto& [name, value] : state) {
        (void)value;
        if (!known.count(name))
            throw Error("state entry \"" + name + "\" does not match any model variable");
    }
    for (size_t i = 0; i < var_names.size(); ++i) {
        auto it = state.find(var_names[i]);
        if (it == state.end()) throw Error("state is missing variable \"" + var_names[i] + "\"");
        u0[i] = it->second;
    }
    return u0;
}

struct CommonArgs {
    std::string project;
    std::string out = ".";
    std::string config;
};

SolveConfig resolve_config(const Project& project, const std::string& name,
                           const std::optional<double>& t0, const std::optional<double>& t1,
                           const std::optional<double>& dt, const std::string& method,
                           const std::optional<double>& abs_tol,
                           const std::optional<double>& rel_tol,
                           const std::optional<int>& save_every) {
    SolveConfig cfg = name.empty() ? SolveConfig{} : project.solve_config(name);
    if (t0) cfg.t0 = *t0;
    if (t1) cfg.t1 = *t1;
    if (dt) cfg.dt = *dt;
    if (!method.empty()) cfg.method = method_from_string(method);
    if (abs_tol) cfg.abs_tol = *abs_tol;
    if (rel_tol) cfg.rel_tol = *rel_tol;
    if (save_every) cfg.save_every = *save_every;
    return cfg;
}

int cmd_validate(const std::string& project_path, const std::string& name) {
    const Project project = Project::load(project_path);
    std::vector<std::string> violations;
    std::string kind;
    if (project.has_net(name)) {
        kind = "net";
        violations = validate_net(project.net(name));
    } else if (project.has_open_net(name)) {
        kind = "open net";
        violations = validate_open_net(project.open_net(name));
    } else if (project.has_typed_net(name)) {
        kind = "typed net";
        violations = validate_typed_net(project.typed_net(name));
    } else if (project.has_open_typed_net(name)) {
        kind = "open typed net";
        violations = validate_typed_net(project.open_typed_net(name).typed);
    } else if (project.has_uwd(name)) {
        kind = "uwd";
        violations = validate_uwd(project.uwd(name));
    } else {
        throw Error("no validatable resource named \"" + name + "\" in the project");
    }
    if (violations.empty()) {
        std::cout << kind << " \"" << name << "\": valid\n";
        return 0;
    }
    std::cout << kind << " \"" << name << "\": " << violations.size() << " violation(s)\n";
    for (const auto& v : violations) std::cout << "  - " << v << "\n";
    return 1;
}

int cmd_compose(const std::string& project_path, const std::string& uwd_name,
                const std::vector<std::string>& binding_args, const std::string& out, bool typed,
                const std::string& type_net_name) {
    const Project project = Project::load(project_path);
    const UWD& diagram = project.uwd(uwd_name);

    std::map<std::string, std::string> assignment;
    for (const auto& arg : binding_args) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos)
            throw Error("binding argument \"" + arg + "\" is not of the form box=resource");
        assignment[arg.substr(0, eq)] = arg.substr(eq + 1);
    }

    const fs::path dir = ensure_out_dir(out);
    if (typed) {
        if (type_net_name.empty()) throw Error("--typed requires --type-net");
        TypedBinding binding;
        for (const auto& [box, res] : assignment) binding[box] = project.open_typed_net(res);
        const OpenTypedPetriNet composite = oapply_typed(diagram, binding, project.net(type_net_name));
        write_file((dir / "composite.json").string(),
                   open_typed_net_to_json(composite).dump(2) + "\n");
        const TypingColors colors = typing_colors(composite.typed);
        DotOptions opts;
        opts.graph_name = "composite";
        opts.species_fill = colors.species_fill;
        opts.transition_fill = colors.transition_fill;
        write_file((dir / "composite.dot").string(), to_dot(composite.typed.net(), opts));
        std::cout << "composite: " << composite.typed.net().species.size() << " species, "
                  << composite.typed.net().transitions.size() << " transitions (typed)\n";
    } else {
        Binding binding;
        for (const auto& [box, res] : assignment) binding[box] = project.open_net(res);
        const OpenPetriNet composite = oapply(diagram, binding);
        write_file((dir / "composite.json").string(), open_net_to_json(composite).dump(2) + "\n");
        DotOptions opts;
        opts.graph_name = "composite";
        write_file((dir / "composite.dot").string(), to_dot(composite.net, opts));
        std::cout << "composite: " << composite.net.species.size() << " species, "
                  << composite.net.transitions.size() << " transitions\n";
    }
    return 0;
}

int cmd_stratify(const std::string& project_path, const std::string& left,
                 const std::string& right, const std::string& out) {
    const Project project = Project::load(project_path);
    const StratifyExport ex =
        stratify_and_project(project.typed_net(left), project.typed_net(right));
    const fs::path dir = ensure_out_dir(out);
    write_file((dir / "stratified.json").string(), stratified_to_json(ex.strat).dump(2) + "\n");
    write_file((dir / "stratified.dot").string(), ex.result_dot);
    write_file((dir / "left.dot").string(), ex.left_dot);
    write_file((dir / "right.dot").string(), ex.right_dot);
    std::cout << "stratified: " << ex.strat.result.net().species.size() << " species, "
              << ex.strat.result.net().transitions.size() << " transitions\n";
    return 0;
}

int cmd_typecheck(const std::string& project_path, const std::string& name) {
    const Project project = Project::load(project_path);
    const TypedPetriNet& tp =
        project.has_typed_net(name) ? project.typed_net(name) : project.open_typed_net(name).typed;
    const auto violations = validate_typed_net(tp);
    if (violations.empty()) {
        std::cout << "typing of \"" << name << "\" is valid\n";
        return 0;
    }
    std::cout << "typing of \"" << name << "\" fails: " << violations.size() << " violation(s)\n";
    for (const auto& v : violations) std::cout << "  - " << v << "\n";
    return 1;
}

int cmd_simulate(const std::string& project_path, const std::string& model,
                 const std::string& state_name, const SolveConfig& cfg, const std::string& out,
                 const std::string& rates_file) {
    const Project project = Project::load(project_path);

    VectorField field;
    if (project.has_net(model) || project.has_open_net(model) || project.has_typed_net(model)) {
        PetriNet net = project.has_net(model)
                           ? project.net(model)
                           : (project.has_open_net(model) ? project.open_net(model).net
                                                          : project.typed_net(model).net());
        if (!rates_file.empty()) net = with_rates(std::move(net), rates_from_file(rates_file));
        field = mass_action(net);
    } else if (project.has_dynamics(model)) {
        if (!rates_file.empty())
            throw Error("--rates-file applies to Petri net models, not dynamics resources");
        field = project.dynamics(model).field;
    } else {
        throw Error("no simulatable model named \"" + model + "\" in the project");
    }

    const auto u0 = state_vector(project.state(state_name), field.var_names);
    Trajectory traj;
    if (field.delays.empty()) {
        traj = solve_ode(field, u0, cfg);
    } else {
        // Constant pre-history equal to the initial state.
        HistoryFn history = [&u0](double, std::span<double> out_state) {
            for (size_t i = 0; i < out_state.size(); ++i) out_state[i] = u0[i];
        };
        traj = solve_dde(field, u0, history, cfg);
    }
    const fs::path dir = ensure_out_dir(out);
    write_file((dir / "trajectory.csv").string(), traj.to_csv());
    std::cout << "trajectory: " << traj.times.size() << " saved points over [" << cfg.t0 << ", "
              << cfg.t1 << "]\n";
    return 0;
}

int cmd_calibrate(const std::string& project_path, const std::string& net_name,
                  const std::string& dataset_name, const std::string& spec_name,
                  const std::string& state_name, const SolveConfig& cfg, unsigned seed,
                  const std::string& out) {
    const Project project = Project::load(project_path);
    const PetriNet& net = project.net(net_name);
    FitSpec spec = project.fit_spec(spec_name);
    spec.seed = seed;
    const auto u0 = state_vector(project.state(state_name), [&] {
        std::vector<std::string> names;
        for (const auto& s : net.species) names.push_back(s.name);
        return names;
    }());
    const FitResult result = calibrate(net, u0, project.dataset(dataset_name), spec, cfg);
    const fs::path dir = ensure_out_dir(out);
    write_file((dir / "results.json").string(), fit_result_to_json(result).dump(2) + "\n");
    std::cout << "calibrated: loss " << result.loss << " after " << result.evaluations
              << " evaluations" << (result.converged ? "" : " (budget exhausted)") << "\n";
    return 0;
}

int cmd_sensitivity(const std::string& project_path, const std::string& net_name,
                    const std::string& ospec_name, const std::string& state_name,
                    const SolveConfig& cfg, double step, const std::string& rates_file,
                    const std::string& out) {
    const Project project = Project::load(project_path);
    const PetriNet& net = project.net(net_name);
    std::map<std::string, double> rates = net.rate_map();
    if (!rates_file.empty())
        for (const auto& [name, value] : rates_from_file(rates_file)) rates[name] = value;
    const auto u0 = state_vector(project.state(state_name), [&] {
        std::vector<std::string> names;
        for (const auto& s : net.species) names.push_back(s.name);
        return names;
    }());
    const auto sens = sensitivity(net, rates, u0, project.outcome_spec(ospec_name), cfg, step);
    const fs::path dir = ensure_out_dir(out);
    write_file((dir / "sensitivities.json").string(), sensitivities_to_json(sens).dump(2) + "\n");
    write_file((dir / "heatmap.dot").string(), sensitivity_heatmap(with_rates(net, rates), sens));
    for (const auto& [name, value] : sens)
        std::cout << name << ": " << value << "\n";
    return 0;
}

int cmd_export_dot(const std::string& project_path, const std::string& name,
                   const std::string& out) {
    const Project project = Project::load(project_path);
    std::string dot;
    if (project.has_net(name)) {
        DotOptions opts;
        opts.graph_name = name;
        dot = to_dot(project.net(name), opts);
    } else if (project.has_open_net(name)) {
        DotOptions opts;
        opts.graph_name = name;
        dot = to_dot(project.open_net(name).net, opts);
    } else if (project.has_typed_net(name) || project.has_open_typed_net(name)) {
        const TypedPetriNet& tp = project.has_typed_net(name)
                                      ? project.typed_net(name)
                                      : project.open_typed_net(name).typed;
        const TypingColors colors = typing_colors(tp);
        DotOptions opts;
        opts.graph_name = name;
        opts.species_fill = colors.species_fill;
        opts.transition_fill = colors.transition_fill;
        opts.comments = {"fill colors encode the typing"};
        dot = to_dot(tp.net(), opts);
    } else {
        throw Error("no exportable resource named \"" + name + "\" in the project");
    }
    const fs::path dir = ensure_out_dir(out);
    write_file((dir / (name + ".dot")).string(), dot);
    std::cout << "wrote " << (dir / (name + ".dot")).string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"compositional Petri net modeling: compose, stratify, simulate, calibrate"};
    app.require_subcommand(1);

    std::string project, out = ".", name, uwd_name, left, right, model, state, dataset, spec;
    std::string config_name, method, rates_file, type_net_name;
    std::vector<std::string> binding_args;
    bool typed = false;
    unsigned seed = 0;
    double fd_step = 1e-4;
    std::optional<double> t0, t1, dt, abs_tol, rel_tol;
    std::optional<int> save_every;

    auto add_project = [&](CLI::App* cmd) {
        cmd->add_option("--project,-p", project, "project JSON file")->required();
    };
    auto add_config_flags = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_name, "solve config resource");
        cmd->add_option("--t0", t0, "start time");
        cmd->add_option("--t1", t1, "end time");
        cmd->add_option("--dt", dt, "fixed/initial step");
        cmd->add_option("--method", method, "rk4 or rk45");
        cmd->add_option("--abs-tol", abs_tol, "absolute tolerance");
        cmd->add_option("--rel-tol", rel_tol, "relative tolerance");
        cmd->add_option("--save-every", save_every, "keep every n-th step");
    };

    auto* validate = app.add_subcommand("validate", "check a resource for violations");
    add_project(validate);
    validate->add_option("name", name, "resource name")->required();

    auto* compose = app.add_subcommand("compose", "glue open models along a wiring diagram");
    add_project(compose);
    compose->add_option("uwd", uwd_name, "wiring diagram resource")->required();
    compose->add_option("binding", binding_args, "box=resource assignments")->required();
    compose->add_option("--out", out, "output directory");
    compose->add_flag("--typed", typed, "compose typed models");
    compose->add_option("--type-net", type_net_name, "type net resource (with --typed)");

    auto* stratify = app.add_subcommand("stratify", "pull back two typed models");
    add_project(stratify);
    stratify->add_option("left", left, "typed net resource")->required();
    stratify->add_option("right", right, "typed net resource")->required();
    stratify->add_option("--out", out, "output directory");

    auto* typecheck = app.add_subcommand("typecheck", "validate a typing morphism");
    add_project(typecheck);
    typecheck->add_option("name", name, "typed net resource")->required();

    auto* simulate = app.add_subcommand("simulate", "integrate a model and write a CSV trajectory");
    add_project(simulate);
    simulate->add_option("model", model, "net / typed net / dynamics resource")->required();
    simulate->add_option("--state", state, "initial state resource")->required();
    simulate->add_option("--rates-file", rates_file, "JSON rate overrides (e.g. calibration output)");
    simulate->add_option("--out", out, "output directory");
    add_config_flags(simulate);

    auto* calibrate_cmd = app.add_subcommand("calibrate", "fit rates to a dataset");
    add_project(calibrate_cmd);
    calibrate_cmd->add_option("net", model, "net resource")->required();
    calibrate_cmd->add_option("dataset", dataset, "dataset resource")->required();
    calibrate_cmd->add_option("fitspec", spec, "fit spec resource")->required();
    calibrate_cmd->add_option("--state", state, "initial state resource")->required();
    calibrate_cmd->add_option("--seed", seed, "perturbation seed for degenerate simplexes");
    calibrate_cmd->add_option("--out", out, "output directory");
    add_config_flags(calibrate_cmd);

    auto* sens_cmd = app.add_subcommand("sensitivity", "finite-difference outcome sensitivities");
    add_project(sens_cmd);
    sens_cmd->add_option("net", model, "net resource")->required();
    sens_cmd->add_option("outcome", spec, "outcome spec resource")->required();
    sens_cmd->add_option("--state", state, "initial state resource")->required();
    sens_cmd->add_option("--step", fd_step, "relative finite-difference step");
    sens_cmd->add_option("--rates-file", rates_file, "JSON rate overrides");
    sens_cmd->add_option("--out", out, "output directory");
    add_config_flags(sens_cmd);

    auto* export_dot = app.add_subcommand("export-dot", "render a resource to DOT");
    add_project(export_dot);
    export_dot->add_option("name", name, "resource name")->required();
    export_dot->add_option("--out", out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed()) return cmd_validate(project, name);
        if (compose->parsed())
            return cmd_compose(project, uwd_name, binding_args, out, typed, type_net_name);
        if (stratify->parsed()) return cmd_stratify(project, left, right, out);
        if (typecheck->parsed()) return cmd_typecheck(project, name);
        if (simulate->parsed()) {
            const Project loaded = Project::load(project);
            const SolveConfig cfg = resolve_config(loaded, config_name, t0, t1, dt, method, abs_tol,
                                                   rel_tol, save_every);
            return cmd_simulate(project, model, state, cfg, out, rates_file);
        }
        if (calibrate_cmd->parsed()) {
            const Project loaded = Project::load(project);
            const SolveConfig cfg = resolve_config(loaded, config_name, t0, t1, dt, method, abs_tol,
                                                   rel_tol, save_every);
            return cmd_calibrate(project, model, dataset, spec, state, cfg, seed, out);
        }
        if (sens_cmd->parsed()) {
            const Project loaded = Project::load(project);
            const SolveConfig cfg = resolve_config(loaded, config_name, t0, t1, dt, method, abs_tol,
                                                   rel_tol, save_every);
            return cmd_sensitivity(project, model, spec, state, cfg, fd_step, rates_file, out);
        }
        if (export_dot->parsed()) return cmd_export_dot(project, name, out);
    } catch (const Error& e) {
        report_error(e.what());
        return 1;
    } catch (const std::exception& e) {
        report_error(e.what());
        return 1;
    }
    return 2;
}
