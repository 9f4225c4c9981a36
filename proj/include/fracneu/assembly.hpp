#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>

#include "fracneu/kernel.hpp"
#include "fracneu/mesh.hpp"
#include "fracneu/problem.hpp"

namespace fracneu {

struct AssemblyOptions {
    int base_order = 10;         // tensor Gauss order for separated panel pairs
    int diag_jacobi_order = 16;  // Gauss-Jacobi order for the same-panel singular term
    int touch_order = 8;         // per-block order inside graded corner schemes
    int grading_levels = 40;     // dyadic levels toward shared corners / the origin
    int threads = 0;             // 0 = OpenMP default
    double quadrature_tolerance = 1e-8;  // gate on the sampled per-panel error estimate
    bool estimate_error = true;
};

/// Assembled discrete forms. stiffness realizes the seminorm
/// [u]^2 = u^T stiffness u over all nodes (exterior excluded pairwise per the
/// seminorm's domain); mass realizes the L^2(B) product on interior nodes.
struct BilinearForms {
    std::shared_ptr<const RadialMesh> mesh;
    KernelConfig cfg;
    Eigen::MatrixXd stiffness;
    Eigen::MatrixXd mass;          // interior-supported
    Eigen::VectorXd lumped_mass;   // row sums of mass
    double quadrature_error_estimate = 0.0;

    std::size_t n_interior() const { return mesh->n_interior(); }
    std::size_t n_total() const { return mesh->n_nodes(); }

    /// Schur complement of the exterior block: stiffness of interior profiles
    /// whose exterior values satisfy the discrete Neumann condition.
    const Eigen::MatrixXd& condensed_stiffness() const { return condensed_; }
    /// Exterior values slaved to an interior profile (rows of -S_EE^{-1} S_EI).
    Eigen::VectorXd extend_exterior(const Eigen::VectorXd& u_interior) const;
    void slave_exterior(DiscreteFunction& u) const;

    Eigen::VectorXd interior(const DiscreteFunction& u) const;
    DiscreteFunction from_interior(const Eigen::VectorXd& u_interior) const;

    void finalize();  // builds condensation operators; called by assemblers

  private:
    Eigen::MatrixXd condensed_;
    Eigen::MatrixXd extension_;  // -S_EE^{-1} S_EI
};

/// Panel-pair assembly, OpenMP-parallel over pairs with a fixed-order scatter
/// pass; output is bit-identical for any thread count.
BilinearForms assemble_forms(const RadialMesh& mesh, const KernelConfig& cfg,
                             const AssemblyOptions& opts = {});

/// Straight serial loop over the same pair list and quadratures; kept as the
/// reference the parallel path is checked against.
BilinearForms assemble_forms_reference(const RadialMesh& mesh, const KernelConfig& cfg,
                                       const AssemblyOptions& opts = {});

double seminorm_sq(const BilinearForms& forms, const DiscreteFunction& u);

/// int_B f(r) phi_i(r) dV for every interior basis function (zero on exterior).
Eigen::VectorXd load_vector(const BilinearForms& forms, const std::function<double(double)>& f,
                            int order = 8);
/// int_B f(r) dV.
double interior_integral(const BilinearForms& forms, const std::function<double(double)>& f,
                         int order = 8);

/// Truncated-power nonlinearity evaluation used by the weak form; declared in
/// nonlinear.hpp, referenced here to keep the residual self-contained.
double g_trunc(const ProblemParams& params, double t);

/// Residual of d<u,v>_stiffness + <u,v>_mass - int_B g(u) v over every basis
/// function; exterior rows reduce to d (S u)_E and enforce N_s u = 0 weakly.
Eigen::VectorXd weak_residual(const BilinearForms& forms, const ProblemParams& params,
                              const DiscreteFunction& u);

/// Scale of the three residual terms, for relative tolerances.
double weak_residual_scale(const BilinearForms& forms, const ProblemParams& params,
                           const DiscreteFunction& u);

/// |v^T S u - (int_B v (-Delta)^s u + int_{B^c} v N_s u)| for smooth radial
/// profiles (capped to constants beyond R_ext); the matrix side uses nodal
/// interpolants. Decreases under mesh refinement.
double check_integration_by_parts(const BilinearForms& forms, const KernelConfig& cfg,
                                  const std::function<double(double)>& u,
                                  const std::function<double(double)>& v);

/// N_s u for a radial callable (same quadrature as the DiscreteFunction path).
double neumann_derivative_fn(const KernelConfig& cfg, const std::function<double(double)>& u,
                             double r_ext);

}  // namespace fracneu
