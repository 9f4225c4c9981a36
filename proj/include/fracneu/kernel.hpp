#pragma once

#include <functional>
#include <vector>

namespace fracneu {

struct RadialMesh;
struct DiscreteFunction;

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

/// Surface measure of the unit sphere S^{n-1}.
double unit_sphere_measure(int n);

/// Normalization constant c_{n,s} = s 4^s Gamma((n+2s)/2) / (pi^{n/2} Gamma(1-s)),
/// the choice that gives the operator the Fourier symbol |xi|^{2s}.
double normalization_constant(int n, double s);

struct KernelConfig {
    int n = 1;
    double s = 0.5;
    double c_ns = 0.0;                  // filled from normalization_constant
    int angular_quadrature_order = 64;  // per-subinterval order for the n>=2 sphere average
    double pv_inner_radius = 1e-3;      // exclusion radius for pointwise principal values

    KernelConfig() = default;
    KernelConfig(int n_, double s_);

    double two_s() const { return 2.0 * s; }
};

/// Sphere average of the kernel |x-y|^{-(n+2s)} for |x| = r, |y| = rho:
///   A(r,rho) = int_{S^{n-1}} (r^2 + rho^2 - 2 r rho cos(theta))^{-(n+2s)/2} dsigma.
/// Radial double integrals of the kernel reduce to 1D integrals with weight
/// rho^{n-1} A(r,rho). Symmetric in (r,rho); blows up like |r-rho|^{-(1+2s)}
/// on the diagonal. Throws std::domain_error when r == rho.
double angular_kernel(const KernelConfig& cfg, double r, double rho);

/// The generic quadrature path for A (theta-integral for n >= 2, atom sum for
/// n = 1). angular_kernel dispatches to the n = 1 closed form; this entry
/// point exists so the two can be compared.
double angular_kernel_quadrature(const KernelConfig& cfg, double r, double rho);

/// Coefficient of the diagonal singularity: A(r,rho) ~ a_sing(r,rho)|r-rho|^{-(1+2s)}
/// with a_sing = kappa_n (r rho)^{-(n-1)/2}; kappa_1 = 1.
double angular_singular_coefficient(const KernelConfig& cfg, double r, double rho);

/// A minus its leading diagonal singularity. For n = 1 this is the exact
/// reflected term (r+rho)^{-(1+2s)}; for n >= 2 it is evaluated by
/// subtraction and loses accuracy very close to the diagonal.
double angular_kernel_regular(const KernelConfig& cfg, double r, double rho);

/// int_R^infinity rho^{n-1} A(r,rho) drho for r < R (constant-tail weight).
double exterior_tail_integral(const KernelConfig& cfg, double r, double R);

/// Exterior value at |x| = r_ext > 1 forced by N_s u = 0:
///   u(x) = int_B u(y)|x-y|^{-(n+2s)} dy / int_B |x-y|^{-(n+2s)} dy,
/// a kernel-weighted average of the interior values of u.
double neumann_extension(const KernelConfig& cfg, const DiscreteFunction& u_interior,
                         double r_ext);

/// Nonlocal normal derivative N_s u(x) = c_{n,s} int_B (u(x)-u(y))|x-y|^{-(n+2s)} dy
/// at |x| = r_ext > 1; u is evaluated by piecewise-linear interpolation.
double neumann_derivative(const KernelConfig& cfg, const DiscreteFunction& u, double r_ext);

struct PointwiseValue {
    double value = 0.0;
    double error_estimate = 0.0;
};

/// Principal-value evaluation of (-Delta)^s u at radius r for a smooth radial
/// profile u : [0,inf) -> R. The exclusion ball is handled by the paired
/// second-difference form; the tail is integrated dyadically and must
/// converge (throws std::domain_error if increments fail to decay).
PointwiseValue pointwise_fractional_laplacian(const KernelConfig& cfg,
                                              const std::function<double(double)>& u, double r);

}  // namespace fracneu
