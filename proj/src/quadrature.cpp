#include "fracneu/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>

namespace fracneu {

static QuadRule compute_gauss_legendre(int n) {
    // Newton iteration on Legendre polynomials, nodes from cosine initial guess.
    QuadRule q;
    q.x.resize(n);
    q.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        q.x[i] = -x;
        q.x[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        q.w[i] = w;
        q.w[n - 1 - i] = w;
    }
    return q;
}

const QuadRule& gauss_legendre(int order) {
    if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    static std::map<int, QuadRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
    return it->second;
}

QuadRule gauss_jacobi_left(int order, double alpha) {
    if (order < 1) throw std::invalid_argument("gauss_jacobi_left: order must be >= 1");
    if (alpha <= -1.0) throw std::invalid_argument("gauss_jacobi_left: alpha must be > -1");
    // Jacobi weight (1-x)^a (1+x)^b with a = 0, b = alpha.
    const double a = 0.0, b = alpha;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
    for (int k = 0; k < order; ++k) {
        double apb = a + b;
        double diag;
        if (k == 0)
            diag = (b - a) / (apb + 2.0);
        else
            diag = (b * b - a * a) / ((2.0 * k + apb) * (2.0 * k + apb + 2.0));
        J(k, k) = diag;
        if (k > 0) {
            double num = 4.0 * k * (k + a) * (k + b) * (k + apb);
            double den = (2.0 * k + apb) * (2.0 * k + apb) * (2.0 * k + apb + 1.0) *
                         (2.0 * k + apb - 1.0);
            double beta = std::sqrt(num / den);
            J(k, k - 1) = beta;
            J(k - 1, k) = beta;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    double mu0 = std::pow(2.0, a + b + 1.0) * std::exp(std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                                                       std::lgamma(a + b + 2.0));
    QuadRule q;
    q.x.resize(order);
    q.w.resize(order);
    for (int k = 0; k < order; ++k) {
        q.x[k] = es.eigenvalues()(k);
        double v = es.eigenvectors()(0, k);
        q.w[k] = mu0 * v * v;
    }
    return q;
}

QuadRule mapped_gauss(int order, double a, double b) {
    const QuadRule& g = gauss_legendre(order);
    QuadRule q;
    q.x.resize(g.size());
    q.w.resize(g.size());
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < g.size(); ++i) {
        q.x[i] = mid + half * g.x[i];
        q.w[i] = half * g.w[i];
    }
    return q;
}

QuadRule mapped_gauss_jacobi(int order, double alpha, double L) {
    // int_0^L h^alpha f(h) dh = (L/2)^(alpha+1) int_{-1}^{1} (1+x)^alpha f(L(1+x)/2) dx
    QuadRule g = gauss_jacobi_left(order, alpha);
    QuadRule q;
    q.x.resize(g.size());
    q.w.resize(g.size());
    double scale = std::pow(0.5 * L, alpha + 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        q.x[i] = 0.5 * L * (1.0 + g.x[i]);
        q.w[i] = scale * g.w[i];
    }
    return q;
}

static double simpson(const std::function<double(double)>& f, double a, double fa, double b,
                      double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

static double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double fa,
                                   double b, double fb, double m, double fm, double whole,
                                   double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(f, a, fa, m, fm, lm, flm);
    double right = simpson(f, m, fm, b, fb, rm, frm);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
    double m = 0.5 * (a + b);
    double fa = f(a), fb = f(b), fm = f(m);
    double whole = simpson(f, a, fa, b, fb, m, fm);
    return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

}  // namespace fracneu
