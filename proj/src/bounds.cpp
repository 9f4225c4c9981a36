#include "fracneu/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "fracneu/isotonic.hpp"
#include "fracneu/kernel.hpp"
#include "fracneu/nonlinear.hpp"
#include "fracneu/quadrature.hpp"

namespace fracneu {

double critical_exponent(int n, double s) {
    if (n < 1) throw std::invalid_argument("critical_exponent: n must be >= 1");
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("critical_exponent: need 0 < s < 1");
    if (s >= 0.5 * n) return std::numeric_limits<double>::infinity();
    return 2.0 * n / (n - 2.0 * s);
}

namespace {

// int_a^b |v(r)|^p dr for linear v with v(a)=va, v(b)=vb, |v| <= 1, in log
// space: returns the plain value (may underflow to 0 harmlessly).
double segment_power_integral_n1(double va, double vb, double a, double b, double p) {
    auto one_sign = [&](double x0, double x1, double len) {
        // both endpoints >= 0 here
        if (len <= 0.0) return 0.0;
        if (std::abs(x1 - x0) < 1e-14 * std::max(x0, x1)) {
            double m = 0.5 * (x0 + x1);
            return m > 0.0 ? len * std::exp(p * std::log(m)) : 0.0;
        }
        double hi = std::max(x0, x1), lo = std::min(x0, x1);
        if (hi <= 0.0) return 0.0;
        double ratio = lo > 0.0 ? std::exp((p + 1.0) * std::log(lo / hi)) : 0.0;
        return len * hi <= 0.0 ? 0.0
                               : len * std::exp(p * std::log(hi)) * (1.0 - ratio) /
                                     ((p + 1.0) * (1.0 - lo / hi));
    };
    if (va >= 0.0 && vb >= 0.0) return one_sign(va, vb, b - a);
    if (va <= 0.0 && vb <= 0.0) return one_sign(-va, -vb, b - a);
    double t = va / (va - vb);  // zero crossing
    double rz = a + t * (b - a);
    return one_sign(std::abs(va), 0.0, rz - a) + one_sign(0.0, std::abs(vb), b - rz);
}

}  // namespace

double lp_norm(const BilinearForms& forms, const DiscreteFunction& u, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: need p >= 1");
    const RadialMesh& mesh = *forms.mesh;
    const int n = forms.cfg.n;
    const double surf = unit_sphere_measure(n);
    double m = 0.0;
    for (std::size_t i = 0; i < mesh.n_interior(); ++i) m = std::max(m, std::abs(u[i]));
    if (m == 0.0) return 0.0;
    double acc = 0.0;  // int (|u|/m)^p dV
    for (std::size_t k = 0; k + 1 < mesh.n_interior(); ++k) {
        double a = mesh.interior_nodes[k], b = mesh.interior_nodes[k + 1];
        double va = u[k] / m, vb = u[k + 1] / m;
        if (n == 1) {
            acc += surf * segment_power_integral_n1(va, vb, a, b, p);
        } else {
            if (p > 1e4)
                throw std::invalid_argument("lp_norm: p above 1e4 unsupported for n >= 2");
            // subdivide toward the larger endpoint where the integrand concentrates
            bool toward_b = std::abs(vb) >= std::abs(va);
            int pieces = p > 64.0 ? 8 : 1;
            std::vector<std::pair<double, double>> segs;
            double hi = b - a;
            for (int c = 0; c + 1 < pieces && hi > 1e-14 * (b - a); ++c) {
                double lo = hi * 0.25;
                segs.emplace_back(toward_b ? b - hi : a + lo, toward_b ? b - lo : a + hi);
                hi = lo;
            }
            segs.emplace_back(toward_b ? b - hi : a, toward_b ? b : a + hi);
            for (auto [x0, x1] : segs) {
                QuadRule g = mapped_gauss(24, x0, x1);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    double t = (g.x[i] - a) / (b - a);
                    double v = std::abs(va + t * (vb - va));
                    double f = v > 0.0 ? std::exp(p * std::log(v)) : 0.0;
                    acc += g.w[i] * surf * std::pow(g.x[i], n - 1.0) * f;
                }
            }
        }
    }
    if (acc <= 0.0) return 0.0;
    return m * std::exp(std::log(acc) / p);
}

namespace {

struct Chain {
    double b, C0, delta_q, gamma_q, C_q, K_q, K_inf, Lambda;
    bool valid;
};

// The L^2*-L^infty bootstrap constants for exponent p_star, mass bound K,
// embedding constant C. Follows the Moser-iteration algebra verbatim.
Chain linf_chain(double p_star, double q, double K, double C, double volB) {
    Chain ch{};
    ch.valid = q < p_star;
    if (!ch.valid) {
        ch.b = 0.5 * (p_star - q + 2.0);
        return ch;
    }
    ch.b = 0.5 * (p_star - q + 2.0);
    ch.C0 = std::exp(0.5 * std::log(ch.b) * ch.b / ((ch.b - 1.0) * (ch.b - 1.0)));
    ch.delta_q = 1.0 / (p_star - q);
    ch.gamma_q = (p_star - 2.0) / (p_star - q);
    ch.C_q = C * std::max(1.0, std::pow(volB, 0.5 * (q - 2.0) / p_star));
    ch.K_q = std::max(2.0, std::pow(2.0, 2.0 / (p_star - q))) *
             std::pow(ch.C_q, 2.0 / (p_star - q)) * ch.C0;
    ch.Lambda = p_star / (p_star - 2.0 * (q - 1.0));
    if (0.5 * ch.gamma_q < 1.0) {
        ch.K_inf = std::pow(
            2.0 * ch.K_q * std::max(1.0, std::pow(K, 0.5 * ch.gamma_q) * std::pow(C, ch.gamma_q)),
            2.0 / (2.0 - ch.gamma_q));
    } else {
        ch.valid = false;
        ch.K_inf = std::numeric_limits<double>::quiet_NaN();
    }
    return ch;
}

}  // namespace

ConstantsReport compute_constants(const ProblemParams& params, const SpectralResult& spectral,
                                  double C_embed, double p_aux) {
    if (!(params.q > 2.0)) throw std::invalid_argument("compute_constants: need q > 2");
    ConstantsReport rep;
    const double q = params.q;
    const double volB = unit_ball_volume(params.n);
    rep.two_star_n = critical_exponent(params.n, params.s);
    rep.two_star_1 = critical_exponent(1, params.s);
    rep.C_embed = C_embed;
    rep.lambda2_r = spectral.lambda2_r;
    rep.lambda2_r_plus = spectral.lambda2_r_plus;

    double p = rep.two_star_n;
    if (!std::isfinite(p)) {
        if (!(p_aux > q))
            throw std::invalid_argument("compute_constants: 2*_n infinite, need p_aux > q");
        p = p_aux;
    }
    rep.p_used = p;

    rep.delta_small = std::pow(2.0, q - 2.0) - 1.0;
    rep.K_mass = 2.0 * volB * (1.0 + 1.0 / rep.delta_small);

    Chain main = linf_chain(p, q, rep.K_mass, C_embed, volB);
    rep.b = main.b;
    rep.beta_sum = main.valid ? 2.0 / (p - q) : std::numeric_limits<double>::quiet_NaN();
    rep.C0 = main.valid ? main.C0 : std::numeric_limits<double>::quiet_NaN();
    rep.delta_q = main.delta_q;
    rep.gamma_q = main.gamma_q;
    rep.C_q = main.C_q;
    rep.K_q = main.K_q;
    rep.K_infty = main.K_inf;
    rep.K_infty_valid = main.valid;
    rep.Lambda_q = std::isfinite(rep.two_star_n)
                       ? rep.two_star_n / (rep.two_star_n - 2.0 * (q - 1.0))
                       : 1.0;
    for (int i = 0; i < 3; ++i) {
        double cc = C_embed * std::pow(2.0, i);
        rep.K_infty_sensitivity[i] = linf_chain(p, q, rep.K_mass, cc, volB).K_inf;
    }

    // cone (primed) chain behind the truncation level t0
    double ell = params.ell;
    rep.delta_prime = std::pow(2.0, ell - 2.0) - 1.0;
    rep.K_mass_prime = 2.0 * volB * (1.0 + 1.0 / rep.delta_prime);
    double p1 = rep.two_star_1;
    if (!std::isfinite(p1)) p1 = std::max(p_aux, 2.0 * q);
    Chain cone = linf_chain(p1, q, rep.K_mass_prime, C_embed, volB);
    if (cone.valid) {
        rep.K_infty_prime =
            cone.K_inf * std::pow(std::max(1.0, 1.0 / params.d), cone.Lambda);
        rep.t0_choice = rep.K_infty_prime + 2.0;
    } else {
        rep.K_infty_prime = std::numeric_limits<double>::quiet_NaN();
        rep.t0_choice = std::numeric_limits<double>::quiet_NaN();
    }

    // d* with the radial eigenvalue standing in for lambda2 (reported as such)
    if (rep.K_infty_valid)
        rep.d_star = std::max(
            1.0, ((q - 1.0) * std::pow(rep.K_infty, q - 2.0) - 1.0) / spectral.lambda2_r);
    else
        rep.d_star = std::numeric_limits<double>::quiet_NaN();
    rep.d_star_star = (q - 2.0) / spectral.lambda2_r_plus;
    return rep;
}

double embedding_constant_estimate(const BilinearForms& forms, double p, bool restrict_to_cone,
                                   const EmbeddingOptions& opts) {
    const double pmax =
        restrict_to_cone ? critical_exponent(1, forms.cfg.s) : critical_exponent(forms.cfg.n, forms.cfg.s);
    if (p > pmax * (1.0 + 1e-12))
        throw std::domain_error("embedding_constant_estimate: p exceeds the critical exponent");
    const std::size_t nI = forms.n_interior();
    const Eigen::MatrixXd& St = forms.condensed_stiffness();
    Eigen::MatrixXd MI = forms.mass.topLeftCorner(nI, nI);
    Eigen::MatrixXd H = St + MI;
    Eigen::VectorXd w = forms.lumped_mass.head(nI);

    auto to_cone = [&](Eigen::VectorXd v) {
        std::vector<double> y(v.data(), v.data() + nI);
        std::vector<double> ww(w.data(), w.data() + nI);
        auto fit = isotonic_nondecreasing(y, ww, 0.0);
        return Eigen::Map<Eigen::VectorXd>(fit.data(), nI);
    };
    auto ratio = [&](const Eigen::VectorXd& v) -> double {
        double h = v.dot(H * v);
        if (h < 1e-280) return 0.0;
        DiscreteFunction u = forms.from_interior(v);
        return lp_norm(forms, u, p) / std::sqrt(h);
    };

    std::vector<Eigen::VectorXd> family;
    family.push_back(Eigen::VectorXd::Ones(nI));
    {
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(St, MI);
        for (int k = 0; k < std::min<int>(opts.eigenmodes, (int)nI); ++k)
            family.push_back(es.eigenvectors().col(k));
    }
    const RadialMesh& mesh = *forms.mesh;
    for (double a : {0.5, 0.75, 0.875, 0.9375})
        for (double beta : {0.75, 1.0, 2.0}) {
            Eigen::VectorXd v(nI);
            for (std::size_t i = 0; i < nI; ++i) {
                double r = mesh.interior_nodes[i];
                v(i) = r > a ? std::pow((r - a) / (1.0 - a), beta) : 0.0;
            }
            family.push_back(v);
        }
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int k = 0; k < opts.random_profiles; ++k) {
        Eigen::VectorXd v(nI);
        double acc = 0.0;
        for (std::size_t i = 0; i < nI; ++i) {
            acc += uni(rng);
            v(i) = acc;
        }
        family.push_back(v);
    }

    double best = 0.0;
    Eigen::VectorXd best_v;
    for (auto& cand : family) {
        Eigen::VectorXd v = restrict_to_cone ? to_cone(cand) : cand;
        double r = ratio(v);
        if (r > best) {
            best = r;
            best_v = v;
        }
    }

    // projected ascent on log(ratio) from the best family member
    if (best_v.size() > 0) {
        Eigen::VectorXd v = best_v;
        double cur = best;
        double tau = 0.1;
        for (int it = 0; it < opts.ascent_steps; ++it) {
            DiscreteFunction u = forms.from_interior(v);
            double m = std::max(u.max_abs(), 1e-300);
            double lp = lp_norm(forms, u, p);
            // d/dv_i log ||u||_p = m^{p-1} L_i / ||u||_p^p with L_i the load of
            // |u/m|^{p-2}(u/m); the prefactor is (m/lp)^{p-1}/lp, an O(1)/lp number.
            Eigen::VectorXd L = load_vector(forms, [&](double r2) {
                                    double x = u.value_at(r2) / m;
                                    double ax = std::abs(x);
                                    double f = ax > 0.0 ? std::exp((p - 1.0) * std::log(ax)) : 0.0;
                                    return (x >= 0.0 ? f : -f);
                                }).head(nI);
            Eigen::VectorXd glp = L * (std::exp((p - 1.0) * std::log(m / lp)) / lp);
            double hh = v.dot(H * v);
            Eigen::VectorXd g = glp - (H * v) / hh;  // grad of log ratio
            bool ok = false;
            for (int bt = 0; bt < 30; ++bt) {
                Eigen::VectorXd cand = v + tau * g.cwiseQuotient(w);
                if (restrict_to_cone) cand = to_cone(cand);
                double rr = ratio(cand);
                if (rr > cur * (1.0 + 1e-14)) {
                    v = std::move(cand);
                    cur = rr;
                    tau *= 1.5;
                    ok = true;
                    break;
                }
                tau *= 0.5;
            }
            if (!ok) break;
        }
        best = std::max(best, cur);
    }
    return best;
}

MoserTrace moser_recurrence_check(const BilinearForms& forms, const ProblemParams& params,
                                  const DiscreteFunction& u, double C_embed, int levels) {
    MoserTrace trace;
    const double q = params.q;
    double p_star = critical_exponent(params.n, params.s);
    if (!std::isfinite(p_star))
        throw std::invalid_argument("moser_recurrence_check: 2*_n must be finite");
    if (!(q < p_star)) throw std::invalid_argument("moser_recurrence_check: need q < 2*_n");

    {
        Eigen::VectorXd res = weak_residual(forms, params, u);
        double rel = res.cwiseAbs().maxCoeff() / weak_residual_scale(forms, params, u);
        if (rel > 1e-6)
            throw std::invalid_argument("moser_recurrence_check: profile is not a solution");
    }

    const double volB = unit_ball_volume(params.n);
    Chain ch = linf_chain(p_star, q, 2.0 * volB * (1.0 + 1.0 / (std::pow(2.0, q - 2.0) - 1.0)),
                          C_embed, volB);
    const double b = ch.b;
    double norm_2star = lp_norm(forms, u, p_star);
    double prev = norm_2star;
    double dfac = std::max(1.0, 1.0 / std::sqrt(params.d));

    trace.all_levels_hold = true;
    trace.normalized_norms_monotone = true;
    double prev_normalized = norm_2star * std::pow(volB, -1.0 / p_star);
    double max_abs = u.max_abs();
    bool all_zero = max_abs == 0.0;
    for (int m = 1; m <= levels; ++m) {
        MoserLevel lev;
        lev.m = m;
        lev.beta_m = std::pow(b, m);
        double pm = lev.beta_m * p_star;
        lev.lhs = lp_norm(forms, u, pm);
        lev.rhs = std::pow(ch.C_q * dfac, 1.0 / lev.beta_m) *
                  std::pow(lev.beta_m, 0.5 / lev.beta_m) *
                  std::pow(1.0 + std::pow(norm_2star, 0.5 * (q - 2.0)), 1.0 / lev.beta_m) * prev;
        if (!all_zero && lev.lhs > lev.rhs * 1.10) trace.all_levels_hold = false;
        double normalized = lev.lhs * std::pow(volB, -1.0 / pm);
        if (normalized < prev_normalized * (1.0 - 1e-9)) trace.normalized_norms_monotone = false;
        prev_normalized = normalized;
        prev = lev.lhs;
        trace.levels.push_back(lev);
    }
    trace.converged_sup = prev;
    // interior sup (the estimate concerns B)
    double linf = 0.0;
    for (std::size_t i = 0; i < forms.n_interior(); ++i) linf = std::max(linf, std::abs(u[i]));
    trace.measured_linf = linf;
    double Lambda = std::isfinite(critical_exponent(params.n, params.s))
                        ? p_star / (p_star - 2.0 * (q - 1.0))
                        : 1.0;
    trace.linf_bound = ch.K_inf * std::max(1.0, std::pow(params.d, -Lambda));
    trace.linf_bound_holds = ch.valid && linf <= trace.linf_bound;
    return trace;
}

double mass_identity_check(const BilinearForms& forms, const ProblemParams& params,
                           const DiscreteFunction& u) {
    Eigen::VectorXd lump = forms.lumped_mass.head(forms.n_interior());
    Eigen::VectorXd uI = forms.interior(u);
    double int_u = lump.dot(uI);
    double int_g =
        interior_integral(forms, [&](double r) { return g_trunc(params, u.value_at(r)); });
    double floor = 1e-12 * unit_ball_volume(params.n);
    return std::abs(int_u - int_g) / std::max(int_u, floor);
}

NonexistenceCertificate nonexistence_certificate(const BilinearForms& forms,
                                                 const ProblemParams& params,
                                                 const SpectralResult& spectral,
                                                 const DiscreteFunction& u, double d_star) {
    NonexistenceCertificate cert;
    const std::size_t nI = forms.n_interior();
    Eigen::VectorXd lump = forms.lumped_mass.head(nI);
    Eigen::VectorXd uI = forms.interior(u);
    double volB = lump.sum();
    cert.u_mean = lump.dot(uI) / volB;
    Eigen::VectorXd phi = uI.array() - cert.u_mean;
    cert.phi_l2_sq = phi.dot(forms.mass.topLeftCorner(nI, nI) * phi);

    Eigen::VectorXd res = weak_residual(forms, params, u);
    cert.residual = res.cwiseAbs().maxCoeff() / weak_residual_scale(forms, params, u);
    cert.residual_verified = cert.residual < 1e-6;

    double linf = 0.0;
    for (std::size_t i = 0; i < nI; ++i) linf = std::max(linf, std::abs(u[i]));
    cert.lhs = (params.d * spectral.lambda2_r + 1.0) * cert.phi_l2_sq;
    cert.rhs = (params.q - 1.0) * std::pow(linf, params.q - 2.0) * cert.phi_l2_sq;
    cert.d_exceeds_threshold = std::isfinite(d_star) && params.d > d_star;
    cert.phi_vanishes = cert.phi_l2_sq < 1e-8;
    cert.vacuous = cert.phi_l2_sq < 1e-20;
    return cert;
}

std::vector<SmallQRow> small_q_limit_check(int n, double s, const std::vector<double>& q_sequence,
                                           double C_embed) {
    double p_star = critical_exponent(n, s);
    if (!std::isfinite(p_star))
        throw std::invalid_argument("small_q_limit_check: 2*_n must be finite");
    const double volB = unit_ball_volume(n);
    std::vector<SmallQRow> rows;
    for (double q : q_sequence) {
        if (!(q > 2.0 && q < 0.5 * (p_star + 2.0)))
            throw std::invalid_argument("small_q_limit_check: q outside (2, (2*+2)/2)");
        double K = 2.0 * volB * (1.0 + 1.0 / (std::pow(2.0, q - 2.0) - 1.0));
        Chain ch = linf_chain(p_star, q, K, C_embed, volB);
        SmallQRow row;
        row.q = q;
        row.K_infty = ch.K_inf;
        row.K_infty_pow = std::pow(ch.K_inf, q - 2.0);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace fracneu
