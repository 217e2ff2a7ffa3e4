#include "opetri/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace opetri {

using nlohmann::json;

namespace {

const json& need(const json& j, const char* key, const char* context) {
    if (!j.is_object())
        throw SchemaError(std::string(context) + ": expected an object");
    auto it = j.find(key);
    if (it == j.end())
        throw SchemaError(std::string(context) + ": missing key \"" + key + "\"");
    return *it;
}

std::vector<int> int_array(const json& j, const char* context) {
    if (!j.is_array()) throw SchemaError(std::string(context) + ": expected an array");
    std::vector<int> out;
    for (const auto& x : j) {
        if (!x.is_number_integer())
            throw SchemaError(std::string(context) + ": expected integers");
        out.push_back(x.get<int>());
    }
    return out;
}

std::string need_string(const json& j, const char* key, const char* context) {
    const auto& v = need(j, key, context);
    if (!v.is_string()) throw SchemaError(std::string(context) + ": \"" + key + "\" must be a string");
    return v.get<std::string>();
}

double need_number(const json& j, const char* key, const char* context) {
    const auto& v = need(j, key, context);
    if (!v.is_number()) throw SchemaError(std::string(context) + ": \"" + key + "\" must be a number");
    return v.get<double>();
}

int need_int(const json& j, const char* key, const char* context) {
    const auto& v = need(j, key, context);
    if (!v.is_number_integer())
        throw SchemaError(std::string(context) + ": \"" + key + "\" must be an integer");
    return v.get<int>();
}

}  // namespace

json net_to_json(const PetriNet& net) {
    json j;
    j["species"] = json::array();
    for (const auto& s : net.species) j["species"].push_back({{"name", s.name}});
    j["transitions"] = json::array();
    for (const auto& t : net.transitions)
        j["transitions"].push_back({{"name", t.name}, {"rate", t.rate}});
    j["inputs"] = json::array();
    for (const auto& a : net.inputs) j["inputs"].push_back({{"is", a.species}, {"it", a.transition}});
    j["outputs"] = json::array();
    for (const auto& a : net.outputs)
        j["outputs"].push_back({{"os", a.species}, {"ot", a.transition}});
    return j;
}

PetriNet net_from_json(const json& j) {
    PetriNet net;
    for (const auto& s : need(j, "species", "net"))
        net.species.push_back({need_string(s, "name", "species entry")});
    for (const auto& t : need(j, "transitions", "net"))
        net.transitions.push_back(
            {need_string(t, "name", "transition entry"), need_number(t, "rate", "transition entry")});
    for (const auto& a : need(j, "inputs", "net"))
        net.inputs.push_back({need_int(a, "is", "input arc"), need_int(a, "it", "input arc")});
    for (const auto& a : need(j, "outputs", "net"))
        net.outputs.push_back({need_int(a, "os", "output arc"), need_int(a, "ot", "output arc")});
    return net;
}

json open_net_to_json(const OpenPetriNet& m) {
    json j = net_to_json(m.net);
    j["legs"] = m.legs;
    return j;
}

OpenPetriNet open_net_from_json(const json& j) {
    OpenPetriNet m;
    m.net = net_from_json(j);
    m.legs = int_array(need(j, "legs", "open net"), "legs");
    return m;
}

json typed_net_to_json(const TypedPetriNet& tp) {
    json j;
    j["net"] = net_to_json(tp.net());
    j["type_net"] = net_to_json(tp.type_net());
    j["typing"] = {{"species_map", tp.typing.species_map},
                   {"transition_map", tp.typing.transition_map},
                   {"input_map", tp.typing.input_map},
                   {"output_map", tp.typing.output_map}};
    return j;
}

TypedPetriNet typed_net_from_json(const json& j) {
    TypedPetriNet tp;
    tp.typing.dom = net_from_json(need(j, "net", "typed net"));
    tp.typing.cod = net_from_json(need(j, "type_net", "typed net"));
    const auto& t = need(j, "typing", "typed net");
    tp.typing.species_map = int_array(need(t, "species_map", "typing"), "species_map");
    tp.typing.transition_map = int_array(need(t, "transition_map", "typing"), "transition_map");
    tp.typing.input_map = int_array(need(t, "input_map", "typing"), "input_map");
    tp.typing.output_map = int_array(need(t, "output_map", "typing"), "output_map");
    return tp;
}

json open_typed_net_to_json(const OpenTypedPetriNet& m) {
    json j = typed_net_to_json(m.typed);
    j["legs"] = m.legs;
    return j;
}

OpenTypedPetriNet open_typed_net_from_json(const json& j) {
    OpenTypedPetriNet m;
    m.typed = typed_net_from_json(j);
    m.legs = int_array(need(j, "legs", "open typed net"), "legs");
    return m;
}

json uwd_to_json(const UWD& u) {
    json j;
    j["outer_ports"] = u.outer_ports;
    j["junctions"] = json::array();
    for (const auto& jn : u.junctions) j["junctions"].push_back({{"name", jn.name}});
    j["boxes"] = json::array();
    for (const auto& b : u.boxes) j["boxes"].push_back({{"name", b.name}, {"ports", b.ports}});
    return j;
}

UWD uwd_from_json(const json& j) {
    UWD u;
    u.outer_ports = int_array(need(j, "outer_ports", "uwd"), "outer_ports");
    for (const auto& jn : need(j, "junctions", "uwd"))
        u.junctions.push_back({need_string(jn, "name", "junction entry")});
    for (const auto& b : need(j, "boxes", "uwd")) {
        BoxRec rec;
        rec.name = need_string(b, "name", "box entry");
        rec.ports = int_array(need(b, "ports", "box entry"), "ports");
        u.boxes.push_back(std::move(rec));
    }
    return u;
}

json stratified_to_json(const StratifiedNet& s) {
    json j = typed_net_to_json(s.result);
    auto pairs = [](const std::vector<std::pair<int, int>>& ps) {
        json a = json::array();
        for (const auto& p : ps) a.push_back({p.first, p.second});
        return a;
    };
    j["provenance"] = {{"species", pairs(s.species_pairs)},
                       {"transitions", pairs(s.transition_pairs)},
                       {"inputs", pairs(s.input_pairs)},
                       {"outputs", pairs(s.output_pairs)}};
    return j;
}

json fit_result_to_json(const FitResult& r) {
    json j;
    j["rates"] = r.rates;
    j["u0"] = r.initial_state;
    j["loss"] = r.loss;
    j["evals"] = r.evaluations;
    j["converged"] = r.converged;
    j["simulation_failures"] = r.simulation_failures;
    return j;
}

json sensitivities_to_json(const std::map<std::string, double>& sens) { return json(sens); }

SolveConfig solve_config_from_json(const json& j) {
    SolveConfig cfg;
    if (j.contains("t0")) cfg.t0 = j["t0"].get<double>();
    if (j.contains("t1")) cfg.t1 = j["t1"].get<double>();
    if (j.contains("dt")) cfg.dt = j["dt"].get<double>();
    if (j.contains("method")) cfg.method = method_from_string(j["method"].get<std::string>());
    if (j.contains("abs_tol")) cfg.abs_tol = j["abs_tol"].get<double>();
    if (j.contains("rel_tol")) cfg.rel_tol = j["rel_tol"].get<double>();
    if (j.contains("max_steps")) cfg.max_steps = j["max_steps"].get<long>();
    if (j.contains("save_every")) cfg.save_every = j["save_every"].get<int>();
    return cfg;
}

namespace {

FreeParam free_param_from_json(const json& j, const char* context) {
    FreeParam p;
    p.name = need_string(j, "name", context);
    p.initial = need_number(j, "initial", context);
    p.lower = need_number(j, "lower", context);
    p.upper = need_number(j, "upper", context);
    return p;
}

}  // namespace

FitSpec fit_spec_from_json(const json& j) {
    FitSpec spec;
    if (j.contains("free"))
        for (const auto& p : j["free"]) spec.free_rates.push_back(free_param_from_json(p, "free rate"));
    if (j.contains("fixed"))
        for (const auto& [name, value] : j["fixed"].items())
            spec.fixed_rates[name] = value.get<double>();
    if (j.contains("free_initial"))
        for (const auto& p : j["free_initial"])
            spec.free_initial.push_back(free_param_from_json(p, "free initial entry"));
    if (j.contains("max_evals")) spec.max_evaluations = j["max_evals"].get<long>();
    if (j.contains("tolerance")) spec.tolerance = j["tolerance"].get<double>();
    return spec;
}

OutcomeSpec outcome_spec_from_json(const json& j) {
    OutcomeSpec spec;
    for (const auto& s : need(j, "species", "outcome spec")) {
        if (!s.is_string()) throw SchemaError("outcome spec: species must be names");
        spec.species.push_back(s.get<std::string>());
    }
    spec.t0 = need_number(j, "t0", "outcome spec");
    spec.t1 = need_number(j, "t1", "outcome spec");
    return spec;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(cell);
    return cells;
}

}  // namespace

Dataset dataset_from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw SchemaError("dataset csv: empty input");
    const auto header = split_csv_line(line);
    if (header.empty() || header[0] != "t")
        throw SchemaError("dataset csv: first header column must be \"t\"");

    Dataset data;
    std::vector<std::string> names(header.begin() + 1, header.end());
    for (const auto& n : names) data.observations[n] = {};
    size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw SchemaError("dataset csv: row " + std::to_string(row) + " has " +
                              std::to_string(cells.size()) + " cells, header has " +
                              std::to_string(header.size()));
        try {
            data.times.push_back(std::stod(cells[0]));
        } catch (const std::exception&) {
            throw SchemaError("dataset csv: row " + std::to_string(row) + ": bad time \"" + cells[0] +
                              "\"");
        }
        for (size_t i = 0; i < names.size(); ++i) {
            const auto& cell = cells[i + 1];
            if (cell.empty()) {
                data.observations[names[i]].push_back(std::nan(""));
            } else {
                try {
                    data.observations[names[i]].push_back(std::stod(cell));
                } catch (const std::exception&) {
                    throw SchemaError("dataset csv: row " + std::to_string(row) + ": bad value \"" +
                                      cell + "\"");
                }
            }
        }
    }
    auto v = validate_dataset(data);
    if (!v.empty()) throw SchemaError("dataset csv: " + v.front());
    return data;
}

std::string dataset_to_csv(const Dataset& data) {
    std::ostringstream os;
    os << "t";
    for (const auto& [name, series] : data.observations) {
        (void)series;
        os << "," << name;
    }
    os << "\n";
    char buf[32];
    for (size_t k = 0; k < data.times.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", data.times[k]);
        os << buf;
        for (const auto& [name, series] : data.observations) {
            (void)name;
            os << ",";
            if (!std::isnan(series[k])) {
                std::snprintf(buf, sizeof(buf), "%.17g", series[k]);
                os << buf;
            }
        }
        os << "\n";
    }
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open \"" + path + "\" for reading");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open \"" + path + "\" for writing");
    out << content;
    if (!out) throw Error("failed writing \"" + path + "\"");
}

}  // namespace opetri
