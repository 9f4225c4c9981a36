#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fracneu/bounds.hpp"
#include "fracneu/config.hpp"
#include "fracneu/format.hpp"
#include "fracneu/nonlinear.hpp"
#include "fracneu/reports.hpp"
#include "fracneu/version.hpp"

namespace fs = std::filesystem;
using namespace fracneu;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitHypothesis = 2;
constexpr int kExitConfig = 64;

void apply_thread_env() {
#ifdef _OPENMP
    if (const char* env = std::getenv("FRAC_NEUMANN_THREADS")) {
        int t = std::atoi(env);
        if (t > 0) omp_set_num_threads(t);
    }
#endif
}

struct Workspace {
    RunConfig cfg;
    std::shared_ptr<const RadialMesh> mesh;
    BilinearForms forms;
    SpectralResult spectral;
    double C_embed = 0.0;
    ConstantsReport report;

    double p_aux() const { return cfg.p_aux > 0.0 ? cfg.p_aux : 2.0 * cfg.params.q; }
};

Workspace prepare(const RunConfig& cfg) {
    Workspace ws;
    ws.cfg = cfg;
    RadialMesh mesh =
        build_mesh(cfg.mesh.n_interior, cfg.mesh.n_exterior, cfg.mesh.R_ext, cfg.mesh.grading);
    KernelConfig kc(cfg.params.n, cfg.params.s);
    AssemblyOptions opts;
    opts.quadrature_tolerance = cfg.tol("quadrature");
    ws.forms = assemble_forms(mesh, kc, opts);
    ws.mesh = ws.forms.mesh;
    SpectrumOptions so;
    so.restarts = cfg.restarts;
    so.seed = cfg.seeds;
    so.kkt_tol = cfg.tol("kkt");
    ws.spectral = compute_spectrum(ws.forms, so);

    double p = critical_exponent(cfg.params.n, cfg.params.s);
    if (!std::isfinite(p)) p = ws.p_aux();
    EmbeddingOptions eo;
    eo.seed = cfg.seeds;
    ws.C_embed = embedding_constant_estimate(ws.forms, std::min(p, 1e4), false, eo);
    ws.report = compute_constants(cfg.params, ws.spectral, ws.C_embed, ws.p_aux());

    ws.cfg.params.set_hypothesis_flags(ws.spectral.lambda2_r_plus);
    if (cfg.t0_mode == T0Mode::automatic) {
        if (!std::isfinite(ws.report.t0_choice))
            throw std::runtime_error("t0 = auto requested but the cone bound chain is invalid");
        ws.cfg.params.t0 = ws.report.t0_choice;
    }
    ws.cfg.params.validate();
    return ws;
}

int cmd_constants(const RunConfig& cfg, const std::string& outdir) {
    Workspace ws = prepare(cfg);
    fs::create_directories(outdir);
    write_constants_txt(outdir + "/constants.txt", ws.report);
    write_constants_json(outdir + "/constants.json", ws.report);
    std::cout << "constants written to " << outdir << " (K_infty "
              << (ws.report.K_infty_valid ? "valid" : "INVALID: q >= (2*+2)/2") << ")\n";
    return ws.report.K_infty_valid ? kExitOk : kExitHypothesis;
}

int cmd_spectrum(const RunConfig& cfg, const std::string& outdir) {
    Workspace ws = prepare(cfg);
    fs::create_directories(outdir);
    write_spectrum_csv(outdir + "/spectrum.csv", ws.spectral);
    write_profile_file(outdir + "/phi2.txt", ws.spectral.phi2, cfg.params.n, cfg.params.s);
    std::cout << "lambda2_r=" << fmt17(ws.spectral.lambda2_r)
              << " lambda2_r_plus=" << fmt17(ws.spectral.lambda2_r_plus) << "\n";
    return kExitOk;
}

void write_verifier_block(std::ostream& os, Workspace& ws, const DiscreteFunction& u) {
    const RunConfig& cfg = ws.cfg;
    double mi = mass_identity_check(ws.forms, ws.cfg.params, u);
    os << "mass_identity=" << fmt17(mi) << "\n";
    double linf = 0.0;
    for (std::size_t i = 0; i < ws.forms.n_interior(); ++i)
        linf = std::max(linf, std::abs(u[i]));
    os << "linf=" << fmt17(linf) << "\n";
    if (ws.report.K_infty_valid && cfg.params.q < ws.report.p_used) {
        try {
            MoserTrace tr =
                moser_recurrence_check(ws.forms, ws.cfg.params, u, ws.C_embed, cfg.levels);
            os << "moser_levels_hold=" << (tr.all_levels_hold ? 1 : 0) << "\n";
            os << "linf_bound=" << fmt17(tr.linf_bound) << "\n";
            os << "linf_bound_holds=" << (tr.linf_bound_holds ? 1 : 0) << "\n";
            for (const auto& lev : tr.levels)
                os << "moser_level_" << lev.m << "=" << fmt17(lev.lhs) << " <= "
                   << fmt17(lev.rhs) << "\n";
        } catch (const std::exception& e) {
            os << "moser_skipped=" << e.what() << "\n";
        }
    } else {
        os << "moser_skipped=hypothesis q < (2*+2)/2 not met or chain invalid\n";
    }
    NonexistenceCertificate cert =
        nonexistence_certificate(ws.forms, ws.cfg.params, ws.spectral, u, ws.report.d_star);
    os << "nonexistence_lhs=" << fmt17(cert.lhs) << "\n";
    os << "nonexistence_rhs=" << fmt17(cert.rhs) << "\n";
    os << "nonexistence_d_exceeds_dstar=" << (cert.d_exceeds_threshold ? 1 : 0) << "\n";
    os << "nonexistence_phi_vanishes=" << (cert.phi_vanishes ? 1 : 0) << "\n";
}

int cmd_solve(const RunConfig& cfg, const std::string& outdir) {
    Workspace ws = prepare(cfg);
    fs::create_directories(outdir);
    EnergyModel model(ws.cfg.params, ws.forms);

    SolverResult result;
    if (ws.cfg.method == "gradient_flow") {
        Eigen::VectorXd phi2 = ws.forms.interior(ws.spectral.phi2);
        Eigen::VectorXd u0 = Eigen::VectorXd::Ones(phi2.size()) + cfg.flow_eps * phi2;
        FlowOptions fo;
        fo.pg_tol = cfg.tol("residual");
        fo.classification_tol = cfg.tol("classification");
        result = gradient_flow(model, ws.forms.from_interior(u0), fo);
    } else if (ws.cfg.method == "newton") {
        Eigen::VectorXd phi2 = ws.forms.interior(ws.spectral.phi2);
        Eigen::VectorXd u0 = Eigen::VectorXd::Ones(phi2.size()) + cfg.flow_eps * phi2;
        result = newton_refine(model, ws.forms.from_interior(u0));
    } else if (ws.cfg.method == "mountain_pass") {
        MountainPassOptions mo;
        mo.path_resolution = cfg.path_resolution;
        mo.max_deformations = cfg.max_deformations;
        mo.classification_tol = cfg.tol("classification");
        result = mountain_pass(model, ws.spectral, mo);
    } else {
        throw ConfigError("unknown solver.method '" + ws.cfg.method + "'");
    }

    {
        std::ofstream os(outdir + "/solution.txt");
        write_solver_result(os, result, cfg.params.n, cfg.params.s);
    }
    {
        std::ofstream os(outdir + "/verify.txt");
        os << "method=" << ws.cfg.method << "\n";
        os << "classification=" << to_string(result.classification) << "\n";
        os << "residual_norm=" << fmt17(result.residual_norm) << "\n";
        write_verifier_block(os, ws, result.u);
    }
    std::cout << "solve: classification=" << to_string(result.classification)
              << " energy=" << fmt17(result.energy)
              << " residual=" << fmt17(result.residual_norm) << "\n";
    return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const std::string& outdir) {
    if (cfg.sweep_d.empty() || cfg.sweep_q.empty())
        throw ConfigError("missing required config key 'sweep.d_values' or 'sweep.q_values'");
    Workspace ws = prepare(cfg);
    fs::create_directories(outdir);

    const std::size_t nd = cfg.sweep_d.size(), nq = cfg.sweep_q.size();
    std::vector<SweepRow> rows(nd * nq);
    // points are independent; rows are gathered in d-major order regardless of
    // execution order
#ifdef _OPENMP
#pragma omp parallel for collapse(2) schedule(dynamic)
#endif
    for (std::size_t id = 0; id < nd; ++id) {
        for (std::size_t iq = 0; iq < nq; ++iq) {
            RunConfig point = cfg;
            point.params.d = cfg.sweep_d[id];
            point.params.q = cfg.sweep_q[iq];
            {
                double cap = std::min(critical_exponent(point.params.n, point.params.s),
                                      point.params.q);
                point.params.ell =
                    std::isfinite(cap) ? 0.5 * (2.0 + cap) : 0.5 * (2.0 + point.params.q);
            }
            point.params.set_hypothesis_flags(ws.spectral.lambda2_r_plus);
            SweepRow row;
            row.d = point.params.d;
            row.q = point.params.q;
            row.s = point.params.s;
            row.n = point.params.n;
            row.lambda2r_plus = ws.spectral.lambda2_r_plus;
            ConstantsReport rep =
                compute_constants(point.params, ws.spectral, ws.C_embed, 2.0 * point.params.q);
            row.d_star = rep.d_star;
            row.d_star_star = rep.d_star_star;
            row.hypothesis_ok =
                point.params.hyp_q_above_threshold && point.params.hyp_q_subcritical_1;
            EnergyModel model(point.params, ws.forms);
            MountainPassOptions mo;
            mo.path_resolution = cfg.path_resolution;
            mo.max_deformations = cfg.max_deformations;
            SolverResult res = mountain_pass(model, ws.spectral, mo);
            row.classification = to_string(res.classification);
            row.energy = res.energy;
            row.residual = res.residual_norm;
            double linf = 0.0;
            for (std::size_t i = 0; i < ws.forms.n_interior(); ++i)
                linf = std::max(linf, std::abs(res.u[i]));
            row.linf = linf;
            rows[id * nq + iq] = std::move(row);
        }
    }
    write_sweep_csv(outdir + "/sweep.csv", rows);
    std::cout << "sweep: " << rows.size() << " rows written\n";
    return kExitOk;
}

int cmd_verify(const RunConfig& cfg, const std::string& outdir, const std::string& solution_file) {
    StoredProfile sp = read_profile_file(solution_file);
    RunConfig point = cfg;
    point.params.n = sp.n;
    point.params.s = sp.s;

    KernelConfig kc(point.params.n, point.params.s);
    std::vector<double> nodes;
    for (std::size_t i = 0; i < sp.u.mesh().n_nodes(); ++i) nodes.push_back(sp.u.mesh().node(i));
    RadialMesh mesh = mesh_from_nodes(nodes);
    AssemblyOptions opts;
    opts.quadrature_tolerance = cfg.tol("quadrature");
    BilinearForms forms = assemble_forms(mesh, kc, opts);
    DiscreteFunction u(forms.mesh, sp.u.values());

    SpectrumOptions so;
    so.restarts = cfg.restarts;
    so.seed = cfg.seeds;
    SpectralResult spectral = compute_spectrum(forms, so);
    double p = critical_exponent(point.params.n, point.params.s);
    if (!std::isfinite(p)) p = 2.0 * point.params.q;
    EmbeddingOptions eo;
    eo.seed = cfg.seeds;
    double C = embedding_constant_estimate(forms, std::min(p, 1e4), false, eo);
    ConstantsReport rep = compute_constants(point.params, spectral, C, 2.0 * point.params.q);
    if (cfg.t0_mode == T0Mode::automatic && std::isfinite(rep.t0_choice))
        point.params.t0 = rep.t0_choice;

    bool ok = true;
    fs::create_directories(outdir);
    std::ofstream os(outdir + "/verify.txt");

    Eigen::VectorXd res = weak_residual(forms, point.params, u);
    double rel = res.cwiseAbs().maxCoeff() / weak_residual_scale(forms, point.params, u);
    double res_tol = std::max(100.0 * cfg.tol("residual"), 1e-8);
    os << "residual=" << fmt17(rel) << " tol=" << fmt17(res_tol) << "\n";
    if (!(rel <= res_tol)) ok = false;

    double mi = mass_identity_check(forms, point.params, u);
    os << "mass_identity=" << fmt17(mi) << "\n";
    if (rel <= res_tol && !(mi <= 1e-6)) ok = false;

    if (rel <= res_tol && rep.K_infty_valid && point.params.q < rep.p_used) {
        MoserTrace tr = moser_recurrence_check(forms, point.params, u, C, cfg.levels);
        os << "moser_levels_hold=" << (tr.all_levels_hold ? 1 : 0) << "\n";
        os << "linf_bound_holds=" << (tr.linf_bound_holds ? 1 : 0) << "\n";
        if (!tr.all_levels_hold || !tr.linf_bound_holds) ok = false;
    }

    NonexistenceCertificate cert =
        nonexistence_certificate(forms, point.params, spectral, u, rep.d_star);
    os << "nonexistence_d_exceeds_dstar=" << (cert.d_exceeds_threshold ? 1 : 0) << "\n";
    os << "nonexistence_phi_vanishes=" << (cert.phi_vanishes ? 1 : 0) << "\n";
    if (cert.residual_verified && cert.d_exceeds_threshold && !cert.phi_vanishes) ok = false;

    double disc = check_integration_by_parts(
        forms, kc, [](double r) { return 1.0 - r * r; }, [](double r) { return r * r; });
    double scale = std::abs(seminorm_sq(forms, interpolate(forms.mesh, [](double r) {
                       return 1.0 - r * r;
                   }))) + 1e-300;
    os << "ibp_discrepancy=" << fmt17(disc) << " relative=" << fmt17(disc / scale) << "\n";
    if (!(disc / scale < 5e-2)) ok = false;

    os << "verdict=" << (ok ? "pass" : "fail") << "\n";
    std::cout << "verify: " << (ok ? "pass" : "fail") << "\n";
    return ok ? kExitOk : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_env();
    CLI::App app{"frac-neumann: numerical laboratory for a semilinear fractional Neumann problem"};
    app.set_version_flag("--version", std::string("frac_neumann ") + kVersion + "\n" +
                                          kNormalizationId);

    std::string config_path, outdir_flag, solution_file;
    auto add_common = [&](CLI::App* sub, bool needs_solution = false) {
        sub->add_option("--config", config_path, "configuration file")->required();
        sub->add_option("--out", outdir_flag, "output directory (overrides [output] dir)");
        if (needs_solution)
            sub->add_option("solution", solution_file, "stored profile to verify")->required();
    };
    CLI::App* c_constants = app.add_subcommand("constants", "explicit constants report");
    CLI::App* c_spectrum = app.add_subcommand("spectrum", "second-eigenvalue variants");
    CLI::App* c_solve = app.add_subcommand("solve", "run the configured solver");
    CLI::App* c_sweep = app.add_subcommand("sweep", "(d,q) phase-diagram CSV");
    CLI::App* c_verify = app.add_subcommand("verify", "re-verify a stored profile");
    add_common(c_constants);
    add_common(c_spectrum);
    add_common(c_solve);
    add_common(c_sweep);
    add_common(c_verify, true);
    app.require_subcommand(0, 1);

    CLI11_PARSE(app, argc, argv);
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return kExitConfig;
    }

    try {
        RunConfig cfg = parse_config_file(config_path);
        std::string outdir = outdir_flag.empty() ? cfg.output_dir : outdir_flag;
        if (c_constants->parsed()) return cmd_constants(cfg, outdir);
        if (c_spectrum->parsed()) return cmd_spectrum(cfg, outdir);
        if (c_solve->parsed()) return cmd_solve(cfg, outdir);
        if (c_sweep->parsed()) return cmd_sweep(cfg, outdir);
        if (c_verify->parsed()) return cmd_verify(cfg, outdir, solution_file);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitVerifyFail;
    }
    return kExitConfig;
}
