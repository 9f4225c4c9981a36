#pragma once

#include <Eigen/Dense>

#include "fracneu/assembly.hpp"

namespace fracneu {

struct SpectrumOptions {
    int restarts = 16;
    unsigned long long seed = 20240915ull;
    double kkt_tol = 1e-8;
    int max_pg_iters = 5000;
    int threads = 0;
};

struct SpectralResult {
    double lambda2 = 0.0;         // radial stand-in for the full-space value
    double lambda2_r = 0.0;
    double lambda2_r_plus = 0.0;
    DiscreteFunction phi2;        // minimizer for lambda2_r_plus, zero-mean, unit L^2(B)
    double residual_lambda2_r = 0.0;       // eigen-residual, relative
    double residual_lambda2_r_plus = 0.0;  // projected-gradient (KKT) norm
    int restarts_used = 0;
};

/// Smallest nonzero generalized eigenvalue of (condensed stiffness, mass) on
/// the zero-mean subspace; the returned profile has its exterior slaved to the
/// discrete Neumann extension. Sign-normalized so the boundary value is > 0.
std::pair<double, DiscreteFunction> second_eigenvalue(const BilinearForms& forms);

/// Rayleigh-quotient minimization over zero-mean radially non-decreasing
/// profiles: projected gradient in the lumped-mass metric with the
/// mean-shift + isotonic projection, multiple random restarts, and a
/// pool-aggregated eigenvalue polish.
std::pair<double, DiscreteFunction> second_monotone_eigenvalue(
    const BilinearForms& forms, const SpectrumOptions& opts = {}, double* kkt_residual = nullptr,
    int* restarts_used = nullptr);

double rayleigh_quotient(const BilinearForms& forms, const DiscreteFunction& v);

/// Full spectral pass: lambda2_r, lambda2_r_plus, phi2, diagnostics.
SpectralResult compute_spectrum(const BilinearForms& forms, const SpectrumOptions& opts = {});

/// The cone-and-mean projection used by the monotone solver (zero-mean shift
/// followed by weighted isotonic regression; idempotent).
Eigen::VectorXd project_zero_mean_monotone(const BilinearForms& forms, Eigen::VectorXd v);

}  // namespace fracneu
