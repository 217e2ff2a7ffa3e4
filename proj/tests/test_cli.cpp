#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "opetri/fixtures.hpp"
#include "opetri/json_io.hpp"

using namespace opetri;
namespace fs = std::filesystem;

namespace {

const std::string kBin = OPETRI_BIN;
const std::string kFixtures = FIXTURES_DIR;
const std::string kProject = kFixtures + "/project.json";

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run(const std::string& args) {
    static int counter = 0;
    const fs::path log = fs::path("cli_log_" + std::to_string(counter++) + ".txt");
    const std::string cmd = kBin + " " + args + " > " + log.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(log);
    std::ostringstream os;
    os << in.rdbuf();
    r.output = os.str();
    fs::remove(log);
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("compose writes the vaccination composite and it reloads cleanly") {
    const std::string out = "cli_out_compose";
    const RunResult r = run("compose -p " + kProject +
                            " epi sir=fig2_sir viv=fig2_viv cross=fig2_cross --out " + out);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("5 species, 7 transitions") != std::string::npos);

    const auto j = nlohmann::json::parse(slurp(fs::path(out) / "composite.json"));
    const OpenPetriNet composite = open_net_from_json(j);
    CHECK(validate_open_net(composite).empty());
    CHECK(composite.net.species.size() == 5);
    CHECK(composite.net.transitions.size() == 7);
    CHECK(slurp(fs::path(out) / "composite.dot").find("digraph") == 0);
}

TEST_CASE("typed compose carries the typing through") {
    const std::string out = "cli_out_compose_typed";
    const RunResult r = run("compose -p " + kProject +
                            " epi sir=fig2_sir_typed viv=fig2_viv_typed cross=fig2_cross_typed"
                            " --typed --type-net p_infectious --out " +
                            out);
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(slurp(fs::path(out) / "composite.json"));
    const OpenTypedPetriNet composite = open_typed_net_from_json(j);
    CHECK(validate_typed_net(composite.typed).empty());
    CHECK(composite.typed.net().species.size() == 5);
}

TEST_CASE("stratify writes a reloadable typed net and three diagrams") {
    const std::string out = "cli_out_stratify";
    const RunResult r = run("stratify -p " + kProject + " sir_typed quarantine_typed --out " + out);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("6 species, 9 transitions") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(fs::path(out) / "stratified.json"));
    const TypedPetriNet reloaded = typed_net_from_json(j);
    CHECK(validate_typed_net(reloaded).empty());
    CHECK(j.contains("provenance"));
    for (const char* name : {"stratified.dot", "left.dot", "right.dot"})
        CHECK(slurp(fs::path(out) / name).find("digraph") == 0);
}

TEST_CASE("stratify with mismatched type nets exits 1") {
    const RunResult r =
        run("stratify -p " + kProject + " sir_typed sis_vector_valid --out cli_out_bad");
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("error") != std::string::npos);
}

TEST_CASE("typecheck passes the valid typing and names the forbidden transitions") {
    const RunResult good = run("typecheck -p " + kProject + " sis_vector_valid");
    CHECK(good.exit_code == 0);
    CHECK(good.output.find("valid") != std::string::npos);

    const RunResult bad = run("typecheck -p " + kProject + " sis_vector_forbidden");
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("host_becomes_vector") != std::string::npos);
    CHECK(bad.output.find("vector_infects_vector") != std::string::npos);
}

TEST_CASE("validate reports violations for a corrupted net file") {
    // Write a minimal project with one broken net inline.
    const fs::path dir = "cli_out_validate";
    fs::create_directories(dir);
    nlohmann::json project;
    project["nets"]["broken"] = {
        {"species", {{{"name", "A"}}}},
        {"transitions", nlohmann::json::array()},
        {"inputs", {{{"is", 7}, {"it", 0}}}},
        {"outputs", nlohmann::json::array()},
    };
    write_file((dir / "p.json").string(), project.dump());
    const RunResult r = run("validate -p " + (dir / "p.json").string() + " broken");
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("out of range") != std::string::npos);

    const RunResult ok = run("validate -p " + kProject + " sir");
    CHECK(ok.exit_code == 0);
}

TEST_CASE("project loading rejects dangling cross-references") {
    const fs::path dir = "cli_out_dangling";
    fs::create_directories(dir);
    nlohmann::json project;
    project["uwds"]["w"] = {{"outer_ports", nlohmann::json::array()},
                            {"junctions", nlohmann::json::array()},
                            {"boxes", nlohmann::json::array()}};
    project["dynamics"]["broken"] = {
        {"compose", {{"uwd", "w"}, {"binding", {{"box", "missing_component"}}}}}};
    write_file((dir / "p.json").string(), project.dump());
    const RunResult r = run("validate -p " + (dir / "p.json").string() + " w");
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("missing_component") != std::string::npos);
}

TEST_CASE("simulate is byte-deterministic and honors the DDE path") {
    const RunResult a =
        run("simulate -p " + kProject + " sir --state sir_u0 --config calib --out cli_out_sim_a");
    const RunResult b =
        run("simulate -p " + kProject + " sir --state sir_u0 --config calib --out cli_out_sim_b");
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    const std::string csv_a = slurp("cli_out_sim_a/trajectory.csv");
    CHECK(csv_a == slurp("cli_out_sim_b/trajectory.csv"));
    CHECK(csv_a.rfind("t,S,I,R\n", 0) == 0);

    const RunResult dde = run("simulate -p " + kProject +
                              " malaria_dde --state malaria_u0 --config dde --out cli_out_sim_dde");
    REQUIRE(dde.exit_code == 0);
    CHECK(slurp("cli_out_sim_dde/trajectory.csv").rfind("t,IH,IV\n", 0) == 0);

    // The CLI output is byte-identical to the equivalent library call.
    SolveConfig cfg;
    cfg.t0 = 0.0;
    cfg.t1 = 50.0;
    cfg.dt = 0.5;
    cfg.method = Method::rk45;
    cfg.abs_tol = 1e-9;
    cfg.rel_tol = 1e-7;
    const Trajectory traj =
        solve_ode(mass_action(opetri::fixtures::sir()), {0.99, 0.01, 0.0}, cfg);
    CHECK(traj.to_csv() == csv_a);
}

TEST_CASE("calibrate writes results and sensitivity consumes them") {
    const RunResult fit = run("calibrate -p " + kProject +
                              " sir sir_data sir_fit --state sir_u0 --config calib"
                              " --out cli_out_fit");
    REQUIRE(fit.exit_code == 0);
    const auto results = nlohmann::json::parse(slurp("cli_out_fit/results.json"));
    CHECK(results.at("rates").at("infection").get<double>() ==
          doctest::Approx(0.3).epsilon(0.05));
    CHECK(results.at("rates").at("recovery").get<double>() == doctest::Approx(0.1).epsilon(0.05));
    CHECK(results.at("evals").get<long>() <= 2000);

    const RunResult sens = run("sensitivity -p " + kProject +
                               " sir noninfectious --state sir_u0 --config default"
                               " --rates-file cli_out_fit/results.json --out cli_out_sens");
    REQUIRE(sens.exit_code == 0);
    const auto sj = nlohmann::json::parse(slurp("cli_out_sens/sensitivities.json"));
    CHECK(sj.at("infection").get<double>() < 0.0);
    CHECK(sj.at("recovery").get<double>() > 0.0);
    CHECK(slurp("cli_out_sens/heatmap.dot").find("sensitivity heatmap") != std::string::npos);
}

TEST_CASE("export-dot renders nets and typed nets") {
    const RunResult r = run("export-dot -p " + kProject + " sviivr_typed --out cli_out_dot");
    REQUIRE(r.exit_code == 0);
    const std::string dot = slurp("cli_out_dot/sviivr_typed.dot");
    CHECK(dot.find("digraph") == 0);
    CHECK(dot.find("fillcolor") != std::string::npos);
}

TEST_CASE("usage errors exit 2, domain errors exit 1") {
    CHECK(run("no-such-command").exit_code == 2);
    CHECK(run("compose -p " + kProject).exit_code == 2);  // missing required args
    CHECK(run("simulate -p " + kProject + " ghost --state sir_u0 --out cli_out_x").exit_code == 1);
    CHECK(run("compose -p " + kProject + " epi sir=fig2_sir --out cli_out_y").exit_code == 1);
    // Arity mismatch: the cross box has four ports, the SIR model three legs.
    const RunResult arity = run("compose -p " + kProject +
                                " epi sir=fig2_sir viv=fig2_viv cross=fig2_sir --out cli_out_z");
    CHECK(arity.exit_code == 1);
    CHECK(arity.output.find("ports") != std::string::npos);
}

TEST_CASE("OPETRI_COLOR=0 strips ANSI escapes from errors") {
    const std::string cmd = "OPETRI_COLOR=0 " + kBin + " typecheck -p " + kProject +
                            " nonexistent > cli_color.txt 2>&1";
    const int rc = std::system(cmd.c_str());
    CHECK(WIFEXITED(rc));
    const std::string out = slurp("cli_color.txt");
    fs::remove("cli_color.txt");
    CHECK(out.find("\033[") == std::string::npos);
    CHECK(out.find("error:") != std::string::npos);
}

TEST_CASE("the checked-in fixture corpus matches a fresh dump") {
    const fs::path regen = "cli_regen_fixtures";
    opetri::fixtures::write_fixture_corpus(regen.string());
    for (const auto& entry : fs::directory_iterator(regen)) {
        const std::string name = entry.path().filename().string();
        CAPTURE(name);
        CHECK(slurp(entry.path()) == slurp(fs::path(kFixtures) / name));
    }
}
