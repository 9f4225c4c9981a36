#pragma once

#include <array>
#include <limits>
#include <vector>

#include "fracneu/assembly.hpp"
#include "fracneu/spectrum.hpp"

namespace fracneu {

/// Every explicit constant of the a priori estimates, in one record. Derived
/// constants that depend on the (numerically estimated, hence lower-bound)
/// embedding constant are indicative, not rigorous.
struct ConstantsReport {
    double two_star_n = 0.0;  // +inf when s >= n/2
    double two_star_1 = 0.0;
    double b = 0.0;               // (p* - q + 2)/2
    double beta_sum = 0.0;        // sum 1/beta_k = 2/(p* - q)
    double C0 = 0.0;              // (prod beta_k^{1/beta_k})^{1/2}
    double delta_small = 0.0;     // 2^{q-2} - 1
    double K_mass = 0.0;          // 2|B|(1 + 1/delta)
    double delta_prime = 0.0;     // 2^{ell-2} - 1
    double K_mass_prime = 0.0;    // 2|B|(1 + 1/delta')
    double C_embed = 0.0;
    double C_q = 0.0;
    double K_q = 0.0;
    double K_infty = std::numeric_limits<double>::quiet_NaN();
    double Lambda_q = 0.0;
    double delta_q = 0.0;
    double gamma_q = 0.0;
    double d_star = 0.0;
    double d_star_star = 0.0;
    double t0_choice = 0.0;
    double p_used = 0.0;  // auxiliary exponent standing in for an infinite 2*
    bool K_infty_valid = false;
    double K_infty_prime = 0.0;  // uniform cone bound behind the t0 choice
    double lambda2_r = 0.0;      // radial stand-in used for lambda2 (reported)
    double lambda2_r_plus = 0.0;
    std::array<double, 3> K_infty_sensitivity{};  // K_infty at C_embed * {1,2,4}
};

struct MoserLevel {
    int m = 0;
    double beta_m = 0.0;
    double lhs = 0.0;  // ||u||_{L^{beta_m 2*}}
    double rhs = 0.0;  // recurrence bound from the previous level
};

struct MoserTrace {
    std::vector<MoserLevel> levels;
    double converged_sup = 0.0;
    double linf_bound = 0.0;    // K_infty max{1, d^{-Lambda_q}}
    double measured_linf = 0.0;
    bool all_levels_hold = false;
    bool linf_bound_holds = false;
    bool normalized_norms_monotone = false;
};

struct NonexistenceCertificate {
    double u_mean = 0.0;
    double phi_l2_sq = 0.0;
    double lhs = 0.0;  // (d lambda2 + 1) int phi^2
    double rhs = 0.0;  // (q-1)||u||_inf^{q-2} int phi^2
    double residual = 0.0;
    bool residual_verified = false;
    bool d_exceeds_threshold = false;
    bool phi_vanishes = false;
    bool vacuous = false;  // constant profile, nothing to certify
};

struct SmallQRow {
    double q = 0.0;
    double K_infty = 0.0;
    double K_infty_pow = 0.0;  // K_infty^{q-2}
};

/// ||u||_{L^p(B)} evaluated in log space; exact per panel for n = 1
/// (piecewise-linear closed form), graded Gauss otherwise.
double lp_norm(const BilinearForms& forms, const DiscreteFunction& u, double p);

ConstantsReport compute_constants(const ProblemParams& params, const SpectralResult& spectral,
                                  double C_embed, double p_aux);

struct EmbeddingOptions {
    int eigenmodes = 8;
    int random_profiles = 16;
    int ascent_steps = 80;
    unsigned long long seed = 777ull;
};

/// Numerical lower estimate of the best constant in ||u||_{L^p(B)} <=
/// C ||u||_{H^s_{B,0}}: max of the ratio over eigenmodes, boundary bumps,
/// random cone profiles, and a projected-ascent refinement.
double embedding_constant_estimate(const BilinearForms& forms, double p, bool restrict_to_cone,
                                   const EmbeddingOptions& opts = {});

MoserTrace moser_recurrence_check(const BilinearForms& forms, const ProblemParams& params,
                                  const DiscreteFunction& u, double C_embed, int levels);

/// |int_B u - int_B g(u)| / max(int_B u, floor); zero for exact solutions.
double mass_identity_check(const BilinearForms& forms, const ProblemParams& params,
                           const DiscreteFunction& u);

NonexistenceCertificate nonexistence_certificate(const BilinearForms& forms,
                                                 const ProblemParams& params,
                                                 const SpectralResult& spectral,
                                                 const DiscreteFunction& u, double d_star);

std::vector<SmallQRow> small_q_limit_check(int n, double s, const std::vector<double>& q_sequence,
                                           double C_embed = 1.0);

}  // namespace fracneu
