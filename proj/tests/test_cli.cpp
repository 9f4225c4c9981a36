#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fracneu/config.hpp"
#include "fracneu/mesh.hpp"

namespace fs = std::filesystem;
using namespace fracneu;

namespace {

std::string bin() { return FRAC_NEUMANN_BIN; }

struct RunOut {
    int code = -1;
    std::string output;
};

RunOut run(const std::string& args) {
    std::string cmd = bin() + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunOut out;
    char buf[512];
    while (fgets(buf, sizeof buf, pipe)) out.output += buf;
    int status = pclose(pipe);
    out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

fs::path sandbox() {
    fs::path p = fs::temp_directory_path() / "fracneu_cli_test";
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream os(p);
    os << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream is(p);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

const char* kSmallConfig =
    "[problem]\n"
    "n = 1\n"
    "s = 0.25\n"
    "d = 1.0\n"
    "q = 2.5\n"
    "[mesh]\n"
    "n_interior = 40\n"
    "n_exterior = 12\n"
    "R_ext = 8\n"
    "grading = 2\n"
    "[solver]\n"
    "restarts = 4\n"
    "seeds = 11\n";

}  // namespace

TEST_CASE("config parser: defaults, lists, errors") {
    RunConfig cfg = parse_config_text(kSmallConfig);
    CHECK(cfg.params.n == 1);
    CHECK(cfg.params.q == 2.5);
    CHECK(cfg.mesh.n_interior == 40);
    CHECK(cfg.tol("residual") == 1e-9);
    CHECK_THROWS_AS(parse_config_text("[problem]\nn = 1\ns = 0.3\nd = 1\n"), ConfigError);
    try {
        parse_config_text("[problem]\nn = 1\ns = 0.3\nd = 1\n");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("problem.q") != std::string::npos);
    }
    RunConfig lists = parse_config_text(std::string(kSmallConfig) +
                                        "[sweep]\nd_values = 1 2, 3\nq_values = 2.4\n");
    CHECK(lists.sweep_d.size() == 3);
    CHECK(lists.sweep_q.size() == 1);
    RunConfig t0auto = parse_config_text(std::string(kSmallConfig) + "[problem2]\n");
    CHECK(t0auto.t0_mode == T0Mode::untruncated);
}

TEST_CASE("version flag names the normalization") {
    RunOut out = run("--version");
    CHECK(out.code == 0);
    CHECK(out.output.find("frac_neumann") != std::string::npos);
    CHECK(out.output.find("Gamma((n+2s)/2)") != std::string::npos);
}

TEST_CASE("constants command: outputs, hypothesis gate, config errors") {
    fs::path dir = sandbox();
    write_file(dir / "ok.cfg", kSmallConfig);
    RunOut ok = run("constants --config " + (dir / "ok.cfg").string() + " --out " +
                    (dir / "out_c").string());
    CHECK(ok.code == 0);
    std::string txt = read_file(dir / "out_c" / "constants.txt");
    CHECK(txt.find("Lambda_q=4") != std::string::npos);  // q=2.5, 2*=4
    CHECK(fs::exists(dir / "out_c" / "constants.json"));

    // q over the gate: exit 2, report still written
    std::string gated(kSmallConfig);
    gated.replace(gated.find("q = 2.5"), 7, "q = 3.2");
    write_file(dir / "gate.cfg", gated);
    RunOut gate = run("constants --config " + (dir / "gate.cfg").string() + " --out " +
                      (dir / "out_g").string());
    CHECK(gate.code == 2);
    CHECK(fs::exists(dir / "out_g" / "constants.txt"));

    // missing key: exit 64 naming it
    write_file(dir / "bad.cfg", "[problem]\nn = 1\ns = 0.25\nq = 2.5\n");
    RunOut bad = run("constants --config " + (dir / "bad.cfg").string() + " --out " +
                     (dir / "out_b").string());
    CHECK(bad.code == 64);
    CHECK(bad.output.find("problem.d") != std::string::npos);
}

TEST_CASE("spectrum command: ordering, round-trip, determinism") {
    fs::path dir = sandbox();
    write_file(dir / "s.cfg", kSmallConfig);
    RunOut r1 = run("spectrum --config " + (dir / "s.cfg").string() + " --out " +
                    (dir / "out_s1").string());
    CHECK(r1.code == 0);
    std::string csv = read_file(dir / "out_s1" / "spectrum.csv");
    CHECK(csv.find("name,value,residual,restarts") != std::string::npos);
    double l2r = 0, l2rp = 0;
    {
        std::istringstream is(csv);
        std::string line;
        std::getline(is, line);
        while (std::getline(is, line)) {
            auto c1 = line.find(',');
            auto c2 = line.find(',', c1 + 1);
            std::string name = line.substr(0, c1);
            double val = std::strtod(line.substr(c1 + 1, c2 - c1 - 1).c_str(), nullptr);
            if (name == "lambda2_r") l2r = val;
            if (name == "lambda2_r_plus") l2rp = val;
        }
    }
    CHECK(l2r > 0.0);
    CHECK(l2r <= l2rp + 1e-10);

    RunOut r2 = run("spectrum --config " + (dir / "s.cfg").string() + " --out " +
                    (dir / "out_s2").string());
    CHECK(r2.code == 0);
    CHECK(read_file(dir / "out_s1" / "spectrum.csv") == read_file(dir / "out_s2" / "spectrum.csv"));
    CHECK(read_file(dir / "out_s1" / "phi2.txt") == read_file(dir / "out_s2" / "phi2.txt"));
}

TEST_CASE("sweep command: 2x2 grid, d-major deterministic rows") {
    fs::path dir = sandbox();
    std::string cfg(kSmallConfig);
    cfg += "[sweep]\nd_values = 0.4 20\nq_values = 2.4 2.6\n"
           "[solver2]\n";
    write_file(dir / "sw.cfg", cfg);
    RunOut r = run("sweep --config " + (dir / "sw.cfg").string() + " --out " +
                   (dir / "out_sw").string());
    CHECK(r.code == 0);
    std::string csv = read_file(dir / "out_sw" / "sweep.csv");
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    CHECK(line ==
          "d,q,s,n,classification,energy,residual,linf,d_star,d_star_star,lambda2r_plus,"
          "hypothesis_ok");
    int rows = 0;
    double prev_d = -1.0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        ++rows;
        double d = std::strtod(line.c_str(), nullptr);
        CHECK(d >= prev_d);
        prev_d = d;
    }
    CHECK(rows == 4);
    RunOut r2 = run("sweep --config " + (dir / "sw.cfg").string() + " --out " +
                    (dir / "out_sw2").string());
    CHECK(read_file(dir / "out_sw" / "sweep.csv") == read_file(dir / "out_sw2" / "sweep.csv"));
}

TEST_CASE("verify command: stored constant passes, corrupted profile fails") {
    fs::path dir = sandbox();
    write_file(dir / "v.cfg", kSmallConfig);
    // store u == 1 on the configured mesh
    {
        auto mesh = std::make_shared<fracneu::RadialMesh>(fracneu::build_mesh(40, 12, 8.0, 2.0));
        fracneu::DiscreteFunction one(mesh, 1.0);
        fracneu::write_profile_file((dir / "one.txt").string(), one, 1, 0.25);
    }
    RunOut ok = run("verify --config " + (dir / "v.cfg").string() + " " +
                    (dir / "one.txt").string() + " --out " + (dir / "out_v").string());
    CHECK(ok.code == 0);
    CHECK(ok.output.find("pass") != std::string::npos);

    // corrupt one value by 10%
    {
        auto sp = fracneu::read_profile_file((dir / "one.txt").string());
        sp.u.values()[10] *= 1.1;
        fracneu::write_profile_file((dir / "bad.txt").string(), sp.u, sp.n, sp.s);
    }
    RunOut bad = run("verify --config " + (dir / "v.cfg").string() + " " +
                     (dir / "bad.txt").string() + " --out " + (dir / "out_vb").string());
    CHECK(bad.code == 1);
}
