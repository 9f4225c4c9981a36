#pragma once

#include <functional>
#include <vector>

namespace fracneu {

struct QuadRule {
    std::vector<double> x;  // nodes
    std::vector<double> w;  // weights
    std::size_t size() const { return x.size(); }
};

/// Gauss-Legendre rule on [-1,1]. Rules are computed once and cached per order.
const QuadRule& gauss_legendre(int order);

/// Gauss-Jacobi rule for the weight (1+x)^alpha on [-1,1], alpha > -1.
/// Built by Golub-Welsch from the Jacobi three-term recurrence.
QuadRule gauss_jacobi_left(int order, double alpha);

/// Nodes/weights of gauss_legendre mapped to [a,b].
QuadRule mapped_gauss(int order, double a, double b);

/// Rule integrating f(h)*h^alpha exactly-for-polynomials on [0,L]:
/// weights already contain the h^alpha factor.
QuadRule mapped_gauss_jacobi(int order, double alpha, double L);

/// Adaptive Simpson on [a,b]; used by diagnostics and test oracles.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 50);

}  // namespace fracneu
