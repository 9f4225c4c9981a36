#include "fracneu/reports.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "fracneu/format.hpp"
#include "fracneu/version.hpp"

namespace fracneu {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output file " + path);
    return os;
}

nlohmann::json num_or_string(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    return x;
}

}  // namespace

void write_constants_txt(const std::string& path, const ConstantsReport& rep) {
    auto os = open_out(path);
    auto put = [&](const char* k, double v) { os << k << "=" << fmt17(v) << "\n"; };
    os << "# normalization: " << kNormalizationId << "\n";
    os << "# lambda2 entries are the radial values; d_star uses lambda2_r as a\n";
    os << "# stand-in for lambda2 and K_infty-derived numbers are indicative\n";
    os << "# (the embedding constant is a numerical lower estimate).\n";
    put("two_star_n", rep.two_star_n);
    put("two_star_1", rep.two_star_1);
    put("b", rep.b);
    put("beta_sum", rep.beta_sum);
    put("C0", rep.C0);
    put("delta_small", rep.delta_small);
    put("K_mass", rep.K_mass);
    put("delta_prime", rep.delta_prime);
    put("K_mass_prime", rep.K_mass_prime);
    put("C_embed", rep.C_embed);
    put("C_q", rep.C_q);
    put("K_q", rep.K_q);
    put("K_infty", rep.K_infty);
    put("Lambda_q", rep.Lambda_q);
    put("delta_q", rep.delta_q);
    put("gamma_q", rep.gamma_q);
    put("d_star", rep.d_star);
    put("d_star_star", rep.d_star_star);
    put("t0_choice", rep.t0_choice);
    put("p_used", rep.p_used);
    os << "K_infty_valid=" << (rep.K_infty_valid ? 1 : 0) << "\n";
    put("K_infty_prime", rep.K_infty_prime);
    put("lambda2_r", rep.lambda2_r);
    put("lambda2_r_plus", rep.lambda2_r_plus);
    put("K_infty_at_C", rep.K_infty_sensitivity[0]);
    put("K_infty_at_2C", rep.K_infty_sensitivity[1]);
    put("K_infty_at_4C", rep.K_infty_sensitivity[2]);
}

void write_constants_json(const std::string& path, const ConstantsReport& rep) {
    nlohmann::json j;
    j["normalization"] = kNormalizationId;
    j["two_star_n"] = num_or_string(rep.two_star_n);
    j["two_star_1"] = num_or_string(rep.two_star_1);
    j["b"] = num_or_string(rep.b);
    j["beta_sum"] = num_or_string(rep.beta_sum);
    j["C0"] = num_or_string(rep.C0);
    j["delta_small"] = num_or_string(rep.delta_small);
    j["K_mass"] = num_or_string(rep.K_mass);
    j["delta_prime"] = num_or_string(rep.delta_prime);
    j["K_mass_prime"] = num_or_string(rep.K_mass_prime);
    j["C_embed"] = num_or_string(rep.C_embed);
    j["C_q"] = num_or_string(rep.C_q);
    j["K_q"] = num_or_string(rep.K_q);
    j["K_infty"] = num_or_string(rep.K_infty);
    j["Lambda_q"] = num_or_string(rep.Lambda_q);
    j["delta_q"] = num_or_string(rep.delta_q);
    j["gamma_q"] = num_or_string(rep.gamma_q);
    j["d_star"] = num_or_string(rep.d_star);
    j["d_star_star"] = num_or_string(rep.d_star_star);
    j["t0_choice"] = num_or_string(rep.t0_choice);
    j["p_used"] = num_or_string(rep.p_used);
    j["K_infty_valid"] = rep.K_infty_valid;
    j["K_infty_prime"] = num_or_string(rep.K_infty_prime);
    j["lambda2_r"] = num_or_string(rep.lambda2_r);
    j["lambda2_r_plus"] = num_or_string(rep.lambda2_r_plus);
    j["K_infty_sensitivity"] = {num_or_string(rep.K_infty_sensitivity[0]),
                                num_or_string(rep.K_infty_sensitivity[1]),
                                num_or_string(rep.K_infty_sensitivity[2])};
    auto os = open_out(path);
    os << j.dump(2) << "\n";
}

void write_spectrum_csv(const std::string& path, const SpectralResult& sp) {
    auto os = open_out(path);
    os << "name,value,residual,restarts\n";
    os << "lambda2_r," << fmt17(sp.lambda2_r) << "," << fmt17(sp.residual_lambda2_r) << ",0\n";
    os << "lambda2_r_plus," << fmt17(sp.lambda2_r_plus) << ","
       << fmt17(sp.residual_lambda2_r_plus) << "," << sp.restarts_used << "\n";
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    auto os = open_out(path);
    os << "d,q,s,n,classification,energy,residual,linf,d_star,d_star_star,lambda2r_plus,"
          "hypothesis_ok\n";
    for (const auto& r : rows) {
        os << fmt17(r.d) << "," << fmt17(r.q) << "," << fmt17(r.s) << "," << r.n << ","
           << r.classification << "," << fmt17(r.energy) << "," << fmt17(r.residual) << ","
           << fmt17(r.linf) << "," << fmt17(r.d_star) << "," << fmt17(r.d_star_star) << ","
           << fmt17(r.lambda2r_plus) << "," << (r.hypothesis_ok ? 1 : 0) << "\n";
    }
}

}  // namespace fracneu
