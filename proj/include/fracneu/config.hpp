#pragma once

#include <map>
#include <string>
#include <vector>

#include "fracneu/problem.hpp"

namespace fracneu {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct MeshSpec {
    int n_interior = 200;
    int n_exterior = 50;
    double R_ext = 8.0;
    double grading = 2.0;
};

enum class T0Mode { number, automatic, untruncated };

/// Flat-section key=value configuration; see README for the grammar.
struct RunConfig {
    ProblemParams params;
    T0Mode t0_mode = T0Mode::untruncated;
    MeshSpec mesh;
    unsigned long long seeds = 20240915ull;
    int restarts = 16;
    int path_resolution = 33;
    int max_deformations = 600;
    int levels = 6;
    double p_aux = 0.0;  // 0: default 2q
    std::string method = "mountain_pass";  // solve: mountain_pass | gradient_flow | newton
    double flow_eps = 0.1;                 // size of the cone perturbation seeding the flow
    std::map<std::string, double> tolerances;
    std::string output_dir = "out";
    std::vector<double> sweep_d, sweep_q;

    double tol(const std::string& name) const;
};

/// Parses the config file; throws ConfigError naming any missing required key.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text);

}  // namespace fracneu
