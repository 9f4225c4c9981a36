#include "fracneu/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fracneu {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

using KV = std::map<std::string, std::string>;  // "section.key" -> value

KV tokenize(const std::string& text) {
    KV kv;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        kv[section.empty() ? key : section + "." + key] = val;
    }
    return kv;
}

double to_number(const std::string& key, const std::string& val) {
    if (val == "inf" || val == "+inf") return std::numeric_limits<double>::infinity();
    char* end = nullptr;
    double x = std::strtod(val.c_str(), &end);
    if (end == val.c_str() || *end != '\0')
        throw ConfigError("config key '" + key + "': cannot parse number from '" + val + "'");
    return x;
}

std::vector<double> to_list(const std::string& key, std::string val) {
    std::replace(val.begin(), val.end(), ',', ' ');
    std::istringstream is(val);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(to_number(key, tok));
    return out;
}

}  // namespace

double RunConfig::tol(const std::string& name) const {
    auto it = tolerances.find(name);
    if (it == tolerances.end()) throw ConfigError("missing tolerance '" + name + "'");
    return it->second;
}

RunConfig parse_config_text(const std::string& text) {
    KV kv = tokenize(text);
    RunConfig cfg;

    auto require = [&](const std::string& key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError("missing required config key '" + key + "'");
        return it->second;
    };
    auto optional_num = [&](const std::string& key, double dflt) {
        auto it = kv.find(key);
        return it == kv.end() ? dflt : to_number(key, it->second);
    };

    cfg.params.n = (int)to_number("problem.n", require("problem.n"));
    cfg.params.s = to_number("problem.s", require("problem.s"));
    cfg.params.d = to_number("problem.d", require("problem.d"));
    cfg.params.q = to_number("problem.q", require("problem.q"));
    {
        double two_star = critical_exponent(cfg.params.n, cfg.params.s);
        double cap = std::min(two_star, cfg.params.q);
        double dflt = std::isfinite(cap) ? 0.5 * (2.0 + cap) : 0.5 * (2.0 + cfg.params.q);
        cfg.params.ell = optional_num("problem.ell", dflt);
    }
    if (auto it = kv.find("problem.t0"); it != kv.end()) {
        if (it->second == "auto") {
            cfg.t0_mode = T0Mode::automatic;
            cfg.params.t0 = std::numeric_limits<double>::infinity();
        } else if (it->second == "inf") {
            cfg.t0_mode = T0Mode::untruncated;
            cfg.params.t0 = std::numeric_limits<double>::infinity();
        } else {
            cfg.t0_mode = T0Mode::number;
            cfg.params.t0 = to_number("problem.t0", it->second);
        }
    }

    cfg.mesh.n_interior = (int)optional_num("mesh.n_interior", cfg.mesh.n_interior);
    cfg.mesh.n_exterior = (int)optional_num("mesh.n_exterior", cfg.mesh.n_exterior);
    cfg.mesh.R_ext = optional_num("mesh.R_ext", cfg.mesh.R_ext);
    cfg.mesh.grading = optional_num("mesh.grading", cfg.mesh.grading);

    cfg.seeds = (unsigned long long)optional_num("solver.seeds", (double)cfg.seeds);
    cfg.restarts = (int)optional_num("solver.restarts", cfg.restarts);
    cfg.path_resolution = (int)optional_num("solver.path_resolution", cfg.path_resolution);
    cfg.max_deformations = (int)optional_num("solver.max_deformations", cfg.max_deformations);
    cfg.levels = (int)optional_num("solver.levels", cfg.levels);
    cfg.p_aux = optional_num("solver.p_aux", 0.0);
    cfg.flow_eps = optional_num("solver.flow_eps", cfg.flow_eps);
    if (auto it = kv.find("solver.method"); it != kv.end()) cfg.method = it->second;

    cfg.tolerances["residual"] = optional_num("tolerances.residual", 1e-9);
    cfg.tolerances["classification"] = optional_num("tolerances.classification", 1e-4);
    cfg.tolerances["kkt"] = optional_num("tolerances.kkt", 1e-8);
    cfg.tolerances["quadrature"] = optional_num("tolerances.quadrature", 1e-8);

    if (auto it = kv.find("output.dir"); it != kv.end()) cfg.output_dir = it->second;
    if (auto it = kv.find("sweep.d_values"); it != kv.end())
        cfg.sweep_d = to_list("sweep.d_values", it->second);
    if (auto it = kv.find("sweep.q_values"); it != kv.end())
        cfg.sweep_q = to_list("sweep.q_values", it->second);

    cfg.params.validate();
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace fracneu
