#include "opetri/fixtures.hpp"

#include <filesystem>
#include <set>

#include "opetri/json_io.hpp"
#include "opetri/solve.hpp"

namespace opetri::fixtures {

TypedPetriNet typed_by(const PetriNet& net, const PetriNet& type_net,
                       const std::vector<int>& species_types,
                       const std::vector<int>& transition_types, bool allow_invalid) {
    if (species_types.size() != net.species.size() ||
        transition_types.size() != net.transitions.size())
        throw Error("typed_by: type assignment sizes do not match the net");

    PetriMorphism typing;
    typing.dom = net;
    typing.cod = type_net;
    typing.species_map = species_types;
    typing.transition_map = transition_types;

    auto derive = [&](const std::vector<InputArc>& model_arcs,
                      const std::vector<InputArc>& type_arcs, std::vector<int>& amap) {
        amap.assign(model_arcs.size(), 0);
        for (size_t t = 0; t < net.transitions.size(); ++t) {
            const int tau = transition_types[t];
            std::vector<int> fiber;
            for (size_t j = 0; j < type_arcs.size(); ++j)
                if (type_arcs[j].transition == tau) fiber.push_back(static_cast<int>(j));
            std::vector<bool> used(fiber.size(), false);
            for (size_t i = 0; i < model_arcs.size(); ++i) {
                if (model_arcs[i].transition != static_cast<int>(t)) continue;
                const int want = species_types[static_cast<size_t>(model_arcs[i].species)];
                int pick = -1;
                for (size_t k = 0; k < fiber.size(); ++k)
                    if (!used[k] &&
                        type_arcs[static_cast<size_t>(fiber[k])].species == want) {
                        pick = static_cast<int>(k);
                        break;
                    }
                if (pick < 0)
                    for (size_t k = 0; k < fiber.size(); ++k)
                        if (!used[k]) {
                            pick = static_cast<int>(k);
                            break;
                        }
                if (pick >= 0) {
                    used[static_cast<size_t>(pick)] = true;
                    amap[i] = fiber[static_cast<size_t>(pick)];
                }
                // No arc left in the fiber: leave index 0 and let
                // validation surface the arity mismatch.
            }
        }
    };
    // Input and output arcs share a struct layout, so one deriver serves
    // both sides via reinterpretation-free copies.
    std::vector<InputArc> model_out(net.outputs.size()), type_out(type_net.outputs.size());
    for (size_t i = 0; i < net.outputs.size(); ++i)
        model_out[i] = {net.outputs[i].species, net.outputs[i].transition};
    for (size_t i = 0; i < type_net.outputs.size(); ++i)
        type_out[i] = {type_net.outputs[i].species, type_net.outputs[i].transition};

    derive(net.inputs, type_net.inputs, typing.input_map);
    derive(model_out, type_out, typing.output_map);

    TypedPetriNet tp{std::move(typing)};
    if (!allow_invalid) {
        auto v = validate_typed_net(tp);
        if (!v.empty()) throw Error("typed_by: derived typing is invalid: " + v.front());
    }
    return tp;
}

PetriNet sir() {
    PetriNet net;
    const int s = net.add_species("S");
    const int i = net.add_species("I");
    const int r = net.add_species("R");
    net.add_transition("infection", 0.3, {s, i}, {i, i});
    net.add_transition("recovery", 0.1, {i}, {r});
    return net;
}

PetriNet p_infectious() {
    PetriNet net;
    const int pop = net.add_species("Pop");
    net.add_transition("disease", 1.0, {pop}, {pop});
    net.add_transition("strata", 1.0, {pop}, {pop});
    net.add_transition("interact", 1.0, {pop, pop}, {pop, pop});
    return net;
}

PetriNet p_vector_borne() {
    PetriNet net;
    const int host = net.add_species("Host");
    const int vec = net.add_species("Vector");
    net.add_transition("host_change", 1.0, {host}, {host});
    net.add_transition("vector_change", 1.0, {vec}, {vec});
    net.add_transition("interaction", 1.0, {host, vec}, {host, vec});
    return net;
}

TypedPetriNet sir_typed() {
    PetriNet net;
    const int s = net.add_species("S");
    const int i = net.add_species("I");
    const int r = net.add_species("R");
    net.add_transition("infection", 0.3, {s, i}, {i, i});
    net.add_transition("recovery", 0.1, {i}, {r});
    net.add_transition("s_strata", 1.0, {s}, {s});
    net.add_transition("i_strata", 1.0, {i}, {i});
    net.add_transition("r_strata", 1.0, {r}, {r});
    return typed_by(net, p_infectious(), {0, 0, 0},
                    {kTypeInteract, kTypeDisease, kTypeStrata, kTypeStrata, kTypeStrata});
}

TypedPetriNet sis_typed() {
    PetriNet net;
    const int s = net.add_species("S");
    const int i = net.add_species("I");
    net.add_transition("infection", 0.4, {s, i}, {i, i});
    net.add_transition("recovery", 0.1, {i}, {s});
    net.add_transition("s_strata", 1.0, {s}, {s});
    net.add_transition("i_strata", 1.0, {i}, {i});
    return typed_by(net, p_infectious(), {0, 0},
                    {kTypeInteract, kTypeDisease, kTypeStrata, kTypeStrata});
}

TypedPetriNet quarantine_typed() {
    PetriNet net;
    const int q = net.add_species("Q");
    const int nq = net.add_species("~Q");
    net.add_transition("enter_q", 0.2, {nq}, {q});
    net.add_transition("exit_q", 0.2, {q}, {nq});
    net.add_transition("q_disease", 1.0, {q}, {q});
    net.add_transition("nq_disease", 1.0, {nq}, {nq});
    net.add_transition("nq_interact", 1.0, {nq, nq}, {nq, nq});
    return typed_by(net, p_infectious(), {0, 0},
                    {kTypeStrata, kTypeStrata, kTypeDisease, kTypeDisease, kTypeInteract});
}

TypedPetriNet age_typed() {
    PetriNet net;
    const int c = net.add_species("Child");
    const int a = net.add_species("Adult");
    net.add_transition("interact_cc", 1.0, {c, c}, {c, c});
    net.add_transition("interact_ca", 1.0, {c, a}, {c, a});
    net.add_transition("interact_ac", 1.0, {a, c}, {a, c});
    net.add_transition("interact_aa", 1.0, {a, a}, {a, a});
    net.add_transition("disease_c", 1.0, {c}, {c});
    net.add_transition("disease_a", 1.0, {a}, {a});
    return typed_by(net, p_infectious(), {0, 0},
                    {kTypeInteract, kTypeInteract, kTypeInteract, kTypeInteract, kTypeDisease,
                     kTypeDisease});
}

TypedPetriNet flux2_typed() {
    PetriNet net;
    const int p1 = net.add_species("P1");
    const int p2 = net.add_species("P2");
    net.add_transition("move_12", 0.1, {p1}, {p2});
    net.add_transition("move_21", 0.1, {p2}, {p1});
    net.add_transition("interact_1", 1.0, {p1, p1}, {p1, p1});
    net.add_transition("interact_2", 1.0, {p2, p2}, {p2, p2});
    net.add_transition("disease_1", 1.0, {p1}, {p1});
    net.add_transition("disease_2", 1.0, {p2}, {p2});
    return typed_by(net, p_infectious(), {0, 0},
                    {kTypeStrata, kTypeStrata, kTypeInteract, kTypeInteract, kTypeDisease,
                     kTypeDisease});
}

TypedPetriNet simple_trip_typed() {
    PetriNet net;
    const int p11 = net.add_species("P11");
    const int p12 = net.add_species("P12");
    const int p21 = net.add_species("P21");
    const int p22 = net.add_species("P22");
    net.add_transition("travel_12_res1", 0.1, {p11}, {p21});
    net.add_transition("travel_21_res1", 0.1, {p21}, {p11});
    net.add_transition("travel_12_res2", 0.1, {p12}, {p22});
    net.add_transition("travel_21_res2", 0.1, {p22}, {p12});
    net.add_transition("interact_p1_11_11", 1.0, {p11, p11}, {p11, p11});
    net.add_transition("interact_p1_11_12", 1.0, {p11, p12}, {p11, p12});
    net.add_transition("interact_p1_12_12", 1.0, {p12, p12}, {p12, p12});
    net.add_transition("interact_p2_21_21", 1.0, {p21, p21}, {p21, p21});
    net.add_transition("interact_p2_21_22", 1.0, {p21, p22}, {p21, p22});
    net.add_transition("interact_p2_22_22", 1.0, {p22, p22}, {p22, p22});
    net.add_transition("disease_11", 1.0, {p11}, {p11});
    net.add_transition("disease_12", 1.0, {p12}, {p12});
    net.add_transition("disease_21", 1.0, {p21}, {p21});
    net.add_transition("disease_22", 1.0, {p22}, {p22});
    return typed_by(net, p_infectious(), {0, 0, 0, 0},
                    {kTypeStrata, kTypeStrata, kTypeStrata, kTypeStrata, kTypeInteract,
                     kTypeInteract, kTypeInteract, kTypeInteract, kTypeInteract, kTypeInteract,
                     kTypeDisease, kTypeDisease, kTypeDisease, kTypeDisease});
}

PetriNet sviivr() {
    PetriNet net;
    const int s = net.add_species("S");
    const int i = net.add_species("I");
    const int iv = net.add_species("Iv");
    const int r = net.add_species("R");
    const int v = net.add_species("V");
    net.add_transition("beta_UU", 0.30, {s, i}, {i, i});
    net.add_transition("gamma_U", 0.10, {i}, {r});
    net.add_transition("beta_VV", 0.05, {v, iv}, {iv, iv});
    net.add_transition("gamma_V", 0.12, {iv}, {r});
    net.add_transition("nu", 0.02, {s}, {v});
    net.add_transition("beta_UV", 0.06, {v, i}, {iv, i});
    net.add_transition("beta_VU", 0.15, {s, iv}, {i, iv});
    return net;
}

TypedPetriNet sviivr_typed() {
    return typed_by(sviivr(), p_infectious(), {0, 0, 0, 0, 0},
                    {kTypeInteract, kTypeDisease, kTypeInteract, kTypeDisease, kTypeStrata,
                     kTypeInteract, kTypeInteract});
}

namespace {

PetriNet sis_vector_net(bool with_forbidden) {
    PetriNet net;
    const int sh = net.add_species("S_H");
    const int ih = net.add_species("I_H");
    const int sv = net.add_species("S_V");
    const int iv = net.add_species("I_V");
    net.add_transition("host_infection", 0.3, {sh, iv}, {ih, iv});
    net.add_transition("host_recovery", 0.1, {ih}, {sh});
    net.add_transition("vector_infection", 0.2, {sv, ih}, {iv, ih});
    net.add_transition("vector_recovery", 0.1, {iv}, {sv});
    if (with_forbidden) {
        net.add_transition("host_becomes_vector", 0.1, {sh}, {sv});
        net.add_transition("vector_infects_vector", 0.1, {iv, sv}, {iv, iv});
    }
    return net;
}

}  // namespace

TypedPetriNet sis_vector_valid() {
    // host_change = 0, vector_change = 1, interaction = 2 in p_vector_borne.
    return typed_by(sis_vector_net(false), p_vector_borne(), {0, 0, 1, 1}, {2, 0, 2, 1});
}

TypedPetriNet sis_vector_forbidden() {
    return typed_by(sis_vector_net(true), p_vector_borne(), {0, 0, 1, 1}, {2, 0, 2, 1, 0, 2},
                    /*allow_invalid=*/true);
}

OpenPetriNet fig2_sir_open() {
    PetriNet net;
    const int s = net.add_species("S");
    const int i = net.add_species("I");
    const int r = net.add_species("R");
    net.add_transition("beta_UU", 0.30, {s, i}, {i, i});
    net.add_transition("gamma_U", 0.10, {i}, {r});
    return {net, {s, i, r}};
}

OpenPetriNet fig2_viv_open() {
    PetriNet net;
    const int v = net.add_species("V");
    const int iv = net.add_species("Iv");
    const int r = net.add_species("R");
    net.add_transition("beta_VV", 0.05, {v, iv}, {iv, iv});
    net.add_transition("gamma_V", 0.12, {iv}, {r});
    return {net, {v, iv, r}};
}

OpenPetriNet fig2_cross_open() {
    PetriNet net;
    const int s = net.add_species("S");
    const int i = net.add_species("I");
    const int iv = net.add_species("Iv");
    const int v = net.add_species("V");
    net.add_transition("nu", 0.02, {s}, {v});
    net.add_transition("beta_UV", 0.06, {v, i}, {iv, i});
    net.add_transition("beta_VU", 0.15, {s, iv}, {i, iv});
    return {net, {s, i, iv, v}};
}

OpenTypedPetriNet fig2_sir_typed_open() {
    auto open = fig2_sir_open();
    return {typed_by(open.net, p_infectious(), {0, 0, 0}, {kTypeInteract, kTypeDisease}),
            open.legs};
}

OpenTypedPetriNet fig2_viv_typed_open() {
    auto open = fig2_viv_open();
    return {typed_by(open.net, p_infectious(), {0, 0, 0}, {kTypeInteract, kTypeDisease}),
            open.legs};
}

OpenTypedPetriNet fig2_cross_typed_open() {
    auto open = fig2_cross_open();
    return {typed_by(open.net, p_infectious(), {0, 0, 0, 0},
                     {kTypeStrata, kTypeInteract, kTypeInteract}),
            open.legs};
}

std::string epi_uwd_source() {
    return "uwd epi(S, I, Iv, R, V) {\n"
           "  sir(S, I, R);\n"
           "  viv(V, Iv, R);\n"
           "  cross(S, I, Iv, V);\n"
           "}";
}

std::string malaria_uwd_source() {
    return "uwd malaria(IH, IV) {\n"
           "  host(IH);\n"
           "  vector(IV);\n"
           "  bloodmeal(IH, IV);\n"
           "}";
}

std::vector<std::pair<std::string, TypedPetriNet>> infectious_palette() {
    return {
        {"sir_typed", sir_typed()},
        {"sis_typed", sis_typed()},
        {"quarantine_typed", quarantine_typed()},
        {"age_typed", age_typed()},
        {"flux2_typed", flux2_typed()},
        {"simple_trip_typed", simple_trip_typed()},
        {"sviivr_typed", sviivr_typed()},
        {"fig2_sir_typed", fig2_sir_typed_open().typed},
        {"fig2_viv_typed", fig2_viv_typed_open().typed},
        {"fig2_cross_typed", fig2_cross_typed_open().typed},
    };
}

namespace {

using nlohmann::json;

std::string dump(const json& j) { return j.dump(2) + "\n"; }

Dataset synthetic_sir_dataset() {
    const PetriNet net = sir();
    SolveConfig cfg;
    cfg.t0 = 0;
    cfg.t1 = 50;
    cfg.dt = 0.1;
    cfg.method = Method::rk45;
    cfg.abs_tol = 1e-12;
    cfg.rel_tol = 1e-10;
    const Trajectory traj = solve_ode(mass_action(net), {0.99, 0.01, 0.0}, cfg);

    Dataset data;
    for (int t = 0; t <= 50; ++t) data.times.push_back(t);
    for (const auto& name : {"S", "I", "R"}) data.observations[name] = {};
    for (double t : data.times) {
        const auto u = traj.at(t);
        data.observations["S"].push_back(u[0]);
        data.observations["I"].push_back(u[1]);
        data.observations["R"].push_back(u[2]);
    }
    return data;
}

}  // namespace

void write_fixture_corpus(const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto path = [&](const std::string& name) { return (fs::path(dir) / name).string(); };

    write_file(path("sir.json"), dump(net_to_json(sir())));
    write_file(path("sviivr.json"), dump(net_to_json(sviivr())));
    write_file(path("p_infectious.json"), dump(net_to_json(p_infectious())));
    write_file(path("p_vector_borne.json"), dump(net_to_json(p_vector_borne())));

    write_file(path("fig2_sir.json"), dump(open_net_to_json(fig2_sir_open())));
    write_file(path("fig2_viv.json"), dump(open_net_to_json(fig2_viv_open())));
    write_file(path("fig2_cross.json"), dump(open_net_to_json(fig2_cross_open())));

    write_file(path("fig2_sir_typed.json"), dump(open_typed_net_to_json(fig2_sir_typed_open())));
    write_file(path("fig2_viv_typed.json"), dump(open_typed_net_to_json(fig2_viv_typed_open())));
    write_file(path("fig2_cross_typed.json"), dump(open_typed_net_to_json(fig2_cross_typed_open())));

    write_file(path("sir_typed.json"), dump(typed_net_to_json(sir_typed())));
    write_file(path("sis_typed.json"), dump(typed_net_to_json(sis_typed())));
    write_file(path("quarantine_typed.json"), dump(typed_net_to_json(quarantine_typed())));
    write_file(path("age_typed.json"), dump(typed_net_to_json(age_typed())));
    write_file(path("flux2_typed.json"), dump(typed_net_to_json(flux2_typed())));
    write_file(path("simple_trip_typed.json"), dump(typed_net_to_json(simple_trip_typed())));
    write_file(path("sviivr_typed.json"), dump(typed_net_to_json(sviivr_typed())));
    write_file(path("sis_vector_valid.json"), dump(typed_net_to_json(sis_vector_valid())));
    write_file(path("sis_vector_forbidden.json"), dump(typed_net_to_json(sis_vector_forbidden())));

    write_file(path("epi.uwd"), epi_uwd_source() + "\n");
    write_file(path("malaria.uwd"), malaria_uwd_source() + "\n");

    write_file(path("sir_data.csv"), dataset_to_csv(synthetic_sir_dataset()));

    json project;
    project["nets"] = {{"sir", "sir.json"},
                       {"sviivr", "sviivr.json"},
                       {"p_infectious", "p_infectious.json"},
                       {"p_vector_borne", "p_vector_borne.json"}};
    project["open_nets"] = {{"fig2_sir", "fig2_sir.json"},
                            {"fig2_viv", "fig2_viv.json"},
                            {"fig2_cross", "fig2_cross.json"}};
    project["open_typed_nets"] = {{"fig2_sir_typed", "fig2_sir_typed.json"},
                                  {"fig2_viv_typed", "fig2_viv_typed.json"},
                                  {"fig2_cross_typed", "fig2_cross_typed.json"}};
    project["typed_nets"] = {{"sir_typed", "sir_typed.json"},
                             {"sis_typed", "sis_typed.json"},
                             {"quarantine_typed", "quarantine_typed.json"},
                             {"age_typed", "age_typed.json"},
                             {"flux2_typed", "flux2_typed.json"},
                             {"simple_trip_typed", "simple_trip_typed.json"},
                             {"sviivr_typed", "sviivr_typed.json"},
                             {"sis_vector_valid", "sis_vector_valid.json"},
                             {"sis_vector_forbidden", "sis_vector_forbidden.json"}};
    project["uwds"] = {{"epi", "epi.uwd"}, {"malaria", "malaria.uwd"}};
    project["dynamics"] = {
        {"rm_host", {{"component", "rm_host"}, {"params", {{"r", 0.05}}}}},
        {"rm_vector", {{"component", "rm_vector"}, {"params", {{"g", 0.1}}}}},
        {"rm_host_dde",
         {{"component", "rm_host"}, {"params", {{"r", 0.05}}}, {"coerce_dde", true}}},
        {"rm_vector_dde",
         {{"component", "rm_vector"}, {"params", {{"g", 0.1}}}, {"coerce_dde", true}}},
        {"rm_bloodmeal",
         {{"component", "rm_bloodmeal"},
          {"params", {{"a", 0.3}, {"b", 0.5}, {"c", 0.5}, {"H", 100.0}, {"V", 400.0}}}}},
        {"rm_bloodmeal_delay",
         {{"component", "rm_bloodmeal_delay"},
          {"params",
           {{"a", 0.3}, {"b", 0.5}, {"c", 0.5}, {"H", 100.0}, {"V", 400.0}, {"tau", 10.0}}}}},
        {"malaria_ode",
         {{"compose",
           {{"uwd", "malaria"},
            {"binding",
             {{"host", "rm_host"}, {"vector", "rm_vector"}, {"bloodmeal", "rm_bloodmeal"}}}}}}},
        {"malaria_dde",
         {{"compose",
           {{"uwd", "malaria"},
            {"binding",
             {{"host", "rm_host_dde"},
              {"vector", "rm_vector_dde"},
              {"bloodmeal", "rm_bloodmeal_delay"}}}}}}},
    };
    project["states"] = {
        {"sir_u0", {{"S", 0.99}, {"I", 0.01}, {"R", 0.0}}},
        {"sviivr_u0", {{"S", 0.94}, {"I", 0.01}, {"Iv", 0.0}, {"R", 0.0}, {"V", 0.05}}},
        {"malaria_u0", {{"IH", 1.0}, {"IV", 10.0}}},
    };
    project["datasets"] = {{"sir_data", "sir_data.csv"}};
    project["solve_configs"] = {
        {"default",
         {{"t0", 0.0},
          {"t1", 100.0},
          {"dt", 0.1},
          {"method", "rk45"},
          {"abs_tol", 1e-10},
          {"rel_tol", 1e-8}}},
        {"calib",
         {{"t0", 0.0},
          {"t1", 50.0},
          {"dt", 0.5},
          {"method", "rk45"},
          {"abs_tol", 1e-9},
          {"rel_tol", 1e-7}}},
        {"dde", {{"t0", 0.0}, {"t1", 60.0}, {"dt", 0.25}, {"method", "rk4"}}},
    };
    project["fit_specs"] = {
        {"sir_fit",
         {{"free", json::array({{{"name", "infection"}, {"initial", 0.5}, {"lower", 0.0}, {"upper", 2.0}},
                                {{"name", "recovery"}, {"initial", 0.5}, {"lower", 0.0}, {"upper", 2.0}}})},
          {"fixed", json::object()},
          {"max_evals", 2000},
          {"tolerance", 1e-14}}},
    };
    project["outcome_specs"] = {
        {"noninfectious", {{"species", json::array({"S", "R"})}, {"t0", 0.0}, {"t1", 100.0}}},
    };
    write_file(path("project.json"), dump(project));
}

}  // namespace opetri::fixtures
