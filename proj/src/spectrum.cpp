#include "fracneu/spectrum.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fracneu/isotonic.hpp"

namespace fracneu {

namespace {

Eigen::VectorXd interior_lumped(const BilinearForms& forms) {
    return forms.lumped_mass.head(forms.n_interior());
}

double rq_interior(const BilinearForms& forms, const Eigen::VectorXd& v) {
    const Eigen::MatrixXd& St = forms.condensed_stiffness();
    const Eigen::MatrixXd& M = forms.mass;
    double den = v.dot(M.topLeftCorner(v.size(), v.size()) * v);
    if (den < 1e-280) throw std::domain_error("rayleigh_quotient: profile has vanishing mass");
    return v.dot(St * v) / den;
}

}  // namespace

Eigen::VectorXd project_zero_mean_monotone(const BilinearForms& forms, Eigen::VectorXd v) {
    Eigen::VectorXd w = interior_lumped(forms);
    double mean = w.dot(v) / w.sum();
    v.array() -= mean;
    std::vector<double> y(v.data(), v.data() + v.size());
    std::vector<double> ww(w.data(), w.data() + w.size());
    std::vector<double> fit = isotonic_nondecreasing(y, ww);
    return Eigen::Map<Eigen::VectorXd>(fit.data(), fit.size());
}

std::pair<double, DiscreteFunction> second_eigenvalue(const BilinearForms& forms) {
    const std::size_t nI = forms.n_interior();
    const Eigen::MatrixXd& St = forms.condensed_stiffness();
    Eigen::MatrixXd MI = forms.mass.topLeftCorner(nI, nI);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(St, MI);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("second_eigenvalue: eigen-iteration failed to converge");
    double lambda = es.eigenvalues()(1);
    Eigen::VectorXd v = es.eigenvectors().col(1);
    if (v(nI - 1) < 0.0) v = -v;
    double rel = (St * v - lambda * (MI * v)).norm() / std::max((St * v).norm(), 1e-300);
    if (rel > 1e-9)
        throw std::runtime_error("second_eigenvalue: eigen-residual above tolerance");
    return {lambda, forms.from_interior(v)};
}

std::pair<double, DiscreteFunction> second_monotone_eigenvalue(const BilinearForms& forms,
                                                               const SpectrumOptions& opts,
                                                               double* kkt_residual,
                                                               int* restarts_used) {
    const std::size_t nI = forms.n_interior();
    const Eigen::MatrixXd& St = forms.condensed_stiffness();
    Eigen::MatrixXd MI = forms.mass.topLeftCorner(nI, nI);
    Eigen::VectorXd w = interior_lumped(forms);

    auto normalize = [&](Eigen::VectorXd v) {
        double nrm = std::sqrt(v.dot(MI * v));
        if (nrm < 1e-280) throw std::runtime_error("monotone eigensolver: degenerate iterate");
        return Eigen::VectorXd(v / nrm);
    };
    auto kkt_norm = [&](const Eigen::VectorXd& v, double lambda) {
        Eigen::VectorXd grad = St * v - lambda * (MI * v);
        Eigen::VectorXd step = v - grad.cwiseQuotient(w);
        Eigen::VectorXd moved = v - project_zero_mean_monotone(forms, step);
        return std::sqrt(moved.dot(MI * moved));
    };

    // pool-aggregated eigenvalue polish: within the active pool structure the
    // quotient is smooth, so one small generalized eigensolve lands exactly.
    auto polish = [&](Eigen::VectorXd v, double& lambda) {
        for (int round = 0; round < 6; ++round) {
            std::vector<int> pool(nI);
            int K = 0;
            for (std::size_t i = 0; i < nI; ++i) {
                if (i > 0 && std::abs(v(i) - v(i - 1)) > 1e-11 * (1.0 + std::abs(v(i)))) ++K;
                pool[i] = K;
            }
            ++K;
            if (K < 2) break;
            Eigen::MatrixXd P = Eigen::MatrixXd::Zero(nI, K);
            for (std::size_t i = 0; i < nI; ++i) P(i, pool[i]) = 1.0;
            Eigen::MatrixXd Sp = P.transpose() * St * P;
            Eigen::MatrixXd Mp = P.transpose() * MI * P;
            Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Sp, Mp);
            if (es.info() != Eigen::Success) break;
            Eigen::VectorXd c = es.eigenvectors().col(1);
            // feasibility across pools
            bool monotone = true;
            for (int k = 1; k < K; ++k)
                if (c(k) < c(k - 1) - 1e-13) monotone = false;
            if (!monotone && c(K - 1) < c(0)) {
                c = -c;
                monotone = true;
                for (int k = 1; k < K; ++k)
                    if (c(k) < c(k - 1) - 1e-13) monotone = false;
            }
            if (!monotone) break;
            Eigen::VectorXd vn = normalize(project_zero_mean_monotone(forms, P * c));
            double ln = rq_interior(forms, vn);
            if (ln <= lambda + 1e-14) {
                v = vn;
                lambda = ln;
            } else {
                break;
            }
            if (kkt_norm(v, lambda) < opts.kkt_tol) break;
        }
        return v;
    };

    auto run_from = [&](Eigen::VectorXd v0) {
        Eigen::VectorXd v = normalize(project_zero_mean_monotone(forms, std::move(v0)));
        double lambda = rq_interior(forms, v);
        double tau = 1.0;
        for (int it = 0; it < opts.max_pg_iters; ++it) {
            Eigen::VectorXd grad = St * v - lambda * (MI * v);
            Eigen::VectorXd dir = grad.cwiseQuotient(w);
            bool accepted = false;
            for (int bt = 0; bt < 40; ++bt) {
                Eigen::VectorXd cand = normalize(project_zero_mean_monotone(forms, v - tau * dir));
                double lc = rq_interior(forms, cand);
                if (lc < lambda - 1e-16 * std::abs(lambda)) {
                    v = cand;
                    lambda = lc;
                    tau *= 1.6;
                    accepted = true;
                    break;
                }
                tau *= 0.5;
            }
            if (!accepted) break;
            if ((it & 15) == 15 && kkt_norm(v, lambda) < opts.kkt_tol) break;
        }
        v = polish(v, lambda);
        return std::make_pair(lambda, v);
    };

    const int R = std::max(1, opts.restarts);
    std::vector<std::pair<double, Eigen::VectorXd>> results(R + 1);

#ifdef _OPENMP
    if (opts.threads > 0) omp_set_num_threads(opts.threads);
#pragma omp parallel for schedule(dynamic)
#endif
    for (int rs = 0; rs <= R; ++rs) {
        Eigen::VectorXd v0(nI);
        if (rs == 0) {
            // warm candidate: the unconstrained radial eigenvector, projected
            v0 = Eigen::VectorXd::Zero(nI);
            try {
                auto [lam, vec] = second_eigenvalue(forms);
                for (std::size_t i = 0; i < nI; ++i) v0(i) = vec[i];
            } catch (...) {
                v0.setLinSpaced(nI, -1.0, 1.0);
            }
        } else {
            // random non-decreasing profile: cumulative sums of non-negative
            // increments, zero-meaned by the projection
            std::mt19937_64 rng(opts.seed + (unsigned long long)rs * 1000003ull);
            std::uniform_real_distribution<double> uni(0.0, 1.0);
            double acc = 0.0;
            for (std::size_t i = 0; i < nI; ++i) {
                acc += uni(rng);
                v0(i) = acc;
            }
        }
        results[rs] = run_from(std::move(v0));
    }

    int best = 0;
    for (int rs = 1; rs <= R; ++rs)
        if (results[rs].first < results[best].first) best = rs;

    double lambda = results[best].first;
    Eigen::VectorXd v = results[best].second;
    double kkt = kkt_norm(v, lambda);
    if (kkt > opts.kkt_tol)
        throw std::runtime_error("second_monotone_eigenvalue: no restart reached the KKT tolerance");
    if (v(nI - 1) < 0.0) v = -v;  // phi2(1) > 0 (projection makes this the generic sign anyway)
    v = normalize(v);
    if (kkt_residual) *kkt_residual = kkt;
    if (restarts_used) *restarts_used = R;
    return {lambda, forms.from_interior(v)};
}

double rayleigh_quotient(const BilinearForms& forms, const DiscreteFunction& v) {
    double den = 0.0;
    {
        Eigen::Map<const Eigen::VectorXd> vv(v.values().data(), v.size());
        den = vv.dot(forms.mass * vv);
    }
    if (den < 1e-280) throw std::domain_error("rayleigh_quotient: profile has vanishing mass");
    return seminorm_sq(forms, v) / den;
}

SpectralResult compute_spectrum(const BilinearForms& forms, const SpectrumOptions& opts) {
    SpectralResult out;
    auto [l2r, v2r] = second_eigenvalue(forms);
    out.lambda2_r = l2r;
    out.lambda2 = l2r;  // radial computation only; see reports for the caveat
    {
        const std::size_t nI = forms.n_interior();
        Eigen::Map<const Eigen::VectorXd> v(v2r.values().data(), nI);
        const Eigen::MatrixXd& St = forms.condensed_stiffness();
        Eigen::MatrixXd MI = forms.mass.topLeftCorner(nI, nI);
        out.residual_lambda2_r =
            (St * v - l2r * (MI * v)).norm() / std::max((St * v).norm(), 1e-300);
    }
    auto [l2rp, phi2] = second_monotone_eigenvalue(forms, opts, &out.residual_lambda2_r_plus,
                                                  &out.restarts_used);
    out.lambda2_r_plus = l2rp;
    out.phi2 = phi2;
    if (!(out.lambda2_r <= out.lambda2_r_plus + 1e-10))
        throw std::runtime_error("compute_spectrum: eigenvalue ordering violated");
    return out;
}

}  // namespace fracneu
