#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fracneu/assembly.hpp"
#include "fracneu/spectrum.hpp"

namespace fracneu {

/// Truncated power nonlinearity g_{q,t0}: t^{q-1} up to t0, then the C^1
/// subcritical continuation with exponent ell; below zero a quadratic penalty
/// (never reached by cone iterates). g_trunc itself is declared in assembly.hpp.
double g_trunc_prime(const ProblemParams& params, double t);
double G_antiderivative(const ProblemParams& params, double t);

struct EnergyModel {
    ProblemParams params;
    const BilinearForms* forms = nullptr;

    EnergyModel(ProblemParams p, const BilinearForms& f) : params(std::move(p)), forms(&f) {
        params.validate();
    }
};

enum class Classification { zero, one, nonconstant };
const char* to_string(Classification c);

struct SolverResult {
    DiscreteFunction u;
    double energy = 0.0;
    double residual_norm = 0.0;  // relative to the scale of the three weak-form terms
    Classification classification = Classification::nonconstant;
    bool in_cone = false;
    int iterations = 0;
    double path_max_energy = 0.0;  // mountain pass only
    bool converged = false;
    std::string status;
};

/// E(u) = (d/2)[u]^2 + (1/2)||u||^2_{L^2(B)} - int_B G(u).
double energy(const EnergyModel& model, const DiscreteFunction& u);

/// Gradient of E in the nodal basis == weak residual with g = g_{q,t0}.
Eigen::VectorXd energy_gradient(const EnergyModel& model, const DiscreteFunction& u);

/// Projection onto the discrete cone {u >= 0, non-decreasing on [0,1]} in the
/// lumped-mass inner product; exterior values re-slaved by the Neumann
/// extension. Idempotent and non-expansive.
DiscreteFunction cone_project(const BilinearForms& forms, const DiscreteFunction& u);

double classification_distance(const BilinearForms& forms, const DiscreteFunction& u,
                               double constant);
Classification classify(const BilinearForms& forms, const DiscreteFunction& u, double tol);

struct FlowOptions {
    int max_iters = 200000;
    double pg_tol = 1e-9;
    double classification_tol = 1e-4;
    double constancy_tol = 1e-7;   // terminal: iterate equals a constant to this L^2 distance
    double blowup_cap = 1e6;       // terminal: sup-norm runaway guard
};

/// Projected descent u <- cone_project(u - tau M^{-1} grad E) with
/// backtracking; energy is non-increasing along accepted steps. Terminates on
/// a small projected gradient, on collapse onto the constant manifold at a
/// classifiable value, on the runaway guard, or on the iteration cap (flag).
SolverResult gradient_flow(const EnergyModel& model, const DiscreteFunction& u0,
                           const FlowOptions& opts = {});

struct NewtonOptions {
    int max_iters = 40;
    double tol = 1e-11;             // relative residual target
    double warm_start_threshold = 1e-2;
};

/// Newton iteration on the weak residual with the exact second variation
/// d S + M - int g'(u) phi phi. Returns a failure flag on singular Jacobians.
SolverResult newton_refine(const EnergyModel& model, const DiscreteFunction& u,
                           const NewtonOptions& opts = {});

struct MountainPassOptions {
    int path_resolution = 33;
    int max_deformations = 600;
    int descent_steps = 4;
    int window = 2;
    double pg_tol = 1e-5;          // hand-off threshold to Newton
    double t_bar = 1e-2;
    double classification_tol = 1e-4;
    NewtonOptions newton;
};

/// Cone-constrained mountain pass: discretized path from 0 to a negative-
/// energy endpoint along t -> t t_inf (1 + t_bar phi2), repeated projected
/// descent of the points around the path maximizer with re-tensioning, then
/// Newton polish of the maximizer.
SolverResult mountain_pass(const EnergyModel& model, const SpectralResult& spectral,
                           const MountainPassOptions& opts = {});

struct ExpansionRow {
    double t = 0.0;
    double measured = 0.0;   // E(v_t) - E(1)
    double predicted = 0.0;  // (t^2/2)(d lambda2r+ - q + 2) ||phi2||^2
    double ratio = 0.0;
};

/// Second-order energy expansion around the constant 1 along phi2, with the
/// mass-preserving normalization of v_t.
std::vector<ExpansionRow> energy_expansion_check(const EnergyModel& model,
                                                 const SpectralResult& spectral,
                                                 const std::vector<double>& t_values);

/// Serialization: key=value header + profile block.
void write_solver_result(std::ostream& os, const SolverResult& r, int n, double s);
void write_solver_result_file(const std::string& path, const SolverResult& r, int n, double s);

}  // namespace fracneu
