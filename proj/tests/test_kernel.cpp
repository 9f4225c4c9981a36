#include <doctest.h>

#include <cmath>
#include <random>

#include "fracneu/kernel.hpp"
#include "fracneu/mesh.hpp"
#include "oracle_utils.hpp"

using namespace fracneu;

TEST_CASE("normalization constant closed forms") {
    // s = 1/2 collapses the Gamma factors: c_{1,1/2} = 1/pi
    CHECK(normalization_constant(1, 0.5) == doctest::Approx(1.0 / M_PI).epsilon(1e-13));
    // n = 2, s = 1/2: Gamma(3/2)/(pi Gamma(1/2)) = 1/(2 pi)
    CHECK(normalization_constant(2, 0.5) == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-10));
    // prefactor s drives the constant to zero
    CHECK(normalization_constant(1, 1e-8) < 1e-7);
    CHECK_THROWS(normalization_constant(1, 1.0));
    CHECK_THROWS(normalization_constant(0, 0.5));
}

TEST_CASE("kernel config carries the documented constant") {
    KernelConfig cfg(3, 0.37);
    CHECK(cfg.c_ns ==
          doctest::Approx(normalization_constant(3, 0.37)).epsilon(1e-12));
}

TEST_CASE("angular kernel n=1 closed form") {
    KernelConfig cfg(1, 0.25);
    double expected = std::pow(0.5, -1.5) + std::pow(1.5, -1.5);  // 3.3727581786980076
    CHECK(angular_kernel(cfg, 0.5, 1.0) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(angular_kernel(cfg, 0.5, 1.0) == doctest::Approx(3.3727581786980076).epsilon(1e-14));
    // the generic quadrature path at n=1 is the exact two-atom sum
    CHECK(angular_kernel_quadrature(cfg, 0.5, 1.0) ==
          doctest::Approx(angular_kernel(cfg, 0.5, 1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(angular_kernel(cfg, 0.7, 0.7), std::domain_error);
}

TEST_CASE("angular kernel symmetry") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.01, 3.0);
    for (int n : {1, 2, 3}) {
        KernelConfig cfg(n, 0.35);
        for (int k = 0; k < 20; ++k) {
            double r = uni(rng), rho = uni(rng);
            if (r == rho) continue;
            CHECK(angular_kernel(cfg, r, rho) ==
                  doctest::Approx(angular_kernel(cfg, rho, r)).epsilon(1e-12));
            CHECK(angular_kernel(cfg, r, rho) > 0.0);
        }
    }
}

TEST_CASE("angular kernel n=3 against an independent adaptive oracle") {
    KernelConfig cfg(3, 0.4);
    double r = 0.3, rho = 0.9;
    // |S^1| = 2 pi: A = 2 pi int_0^pi sin(th) (r^2+rho^2-2 r rho cos th)^{-(3+0.8)/2} dth
    auto f = [&](double th) {
        return 2.0 * M_PI * std::sin(th) *
               std::pow(r * r + rho * rho - 2.0 * r * rho * std::cos(th), -0.5 * 3.8);
    };
    double expected = oracle::integrate(f, 0.0, M_PI, 1e-13);
    CHECK(expected == doctest::Approx(23.11290433357435).epsilon(1e-10));  // frozen oracle value
    CHECK(angular_kernel(cfg, r, rho) == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("angular kernel n=2 near-diagonal matches the oracle") {
    KernelConfig cfg(2, 0.3);
    double r = 1.0, rho = 1.001;
    auto f = [&](double th) {
        return 2.0 * std::pow(r * r + rho * rho - 2.0 * r * rho * std::cos(th), -0.5 * 2.6);
    };
    // value is ~6e4 (pre-asymptotic diagonal blow-up); tolerance is absolute
    double expected = oracle::integrate(f, 0.0, M_PI, 1e-5, 40);
    CHECK(angular_kernel(cfg, r, rho) == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("regular part stays bounded near the diagonal for n=1") {
    KernelConfig cfg(1, 0.45);
    CHECK(angular_kernel_regular(cfg, 0.5, 0.5000001) ==
          doctest::Approx(std::pow(1.0000001, -1.9)).epsilon(1e-12));
    CHECK(angular_singular_coefficient(cfg, 0.3, 0.31) == 1.0);
}

TEST_CASE("singular coefficient captures the n>=2 diagonal blow-up") {
    for (int n : {2, 3}) {
        KernelConfig cfg(n, 0.3);
        double r = 0.8;
        // A(r, r+h) * h^{1+2s} -> a_sing(r,r) as h -> 0
        double prev_err = 1e300;
        for (double h : {1e-3, 1e-4, 1e-5}) {
            double lim = angular_kernel(cfg, r, r + h) * std::pow(h, 1.0 + 2.0 * cfg.s);
            double ref = angular_singular_coefficient(cfg, r, r + h);
            double err = std::abs(lim / ref - 1.0);
            CHECK(err < prev_err * 1.05);
            prev_err = err;
        }
        CHECK(prev_err < 2e-4);
    }
}

TEST_CASE("exterior tail integral: n=1 closed form vs dyadic quadrature route") {
    KernelConfig cfg1(1, 0.3);
    double r = 0.6, R = 8.0;
    double closed = exterior_tail_integral(cfg1, r, R);
    // independent check: int_R^inf [(rho-r)^-1.6 + (rho+r)^-1.6] via dyadic oracle segments
    auto f = [&](double rho) {
        return std::pow(rho - r, -1.6) + std::pow(rho + r, -1.6);
    };
    double acc = 0.0, lo = R, w = 1.0;
    for (int k = 0; k < 200; ++k) {
        acc += oracle::integrate(f, lo, lo + w, 1e-14);
        lo += w;
        w *= 2.0;
        if (std::pow(lo - r, -0.6) / 0.6 < 1e-13 * acc) break;
    }
    CHECK(closed == doctest::Approx(acc).epsilon(1e-9));
}

static std::shared_ptr<const RadialMesh> small_mesh() {
    return std::make_shared<RadialMesh>(build_mesh(64, 16, 8.0, 2.0));
}

TEST_CASE("neumann extension of a constant is the constant") {
    KernelConfig cfg(1, 0.3);
    auto mesh = small_mesh();
    DiscreteFunction u(mesh, 3.25);
    for (double r : {1.05, 1.5, 2.0, 7.5})
        CHECK(neumann_extension(cfg, u, r) == doctest::Approx(3.25).epsilon(1e-13));
    CHECK_THROWS_AS(neumann_extension(cfg, u, 0.9), std::domain_error);
}

TEST_CASE("neumann extension is a weighted average and monotone in the data") {
    KernelConfig cfg(1, 0.35);
    auto mesh = small_mesh();
    DiscreteFunction u1 = interpolate(mesh, [](double r) { return r; });
    DiscreteFunction u2 = interpolate(mesh, [](double r) { return r + 0.25 * r * r; });
    for (double re : {1.2, 1.5, 3.0}) {
        double e1 = neumann_extension(cfg, u1, re);
        CHECK(e1 > 0.0);
        CHECK(e1 < 1.0);
        CHECK(neumann_extension(cfg, u2, re) >= e1);  // u2 >= u1 on B
    }
}

TEST_CASE("neumann extension of u(r)=r matches a Monte-Carlo oracle") {
    KernelConfig cfg(1, 0.3);
    auto mesh = small_mesh();
    DiscreteFunction u = interpolate(mesh, [](double r) { return r; });
    double x = 1.5;
    // MC for num = int_{-1}^{1} |y| |x-y|^{-1.6} dy, den likewise (antithetic pairs)
    std::mt19937_64 rng(123456);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const long N = 4000000;
    double num = 0.0, den = 0.0;
    for (long k = 0; k < N; ++k) {
        double y = uni(rng);
        for (double yy : {y, -y}) {
            double kk = std::pow(std::abs(x - yy), -1.6);
            num += std::abs(yy) * kk;
            den += kk;
        }
    }
    double mc = num / den;
    double val = neumann_extension(cfg, u, x);
    CHECK(val == doctest::Approx(mc).epsilon(1e-4));
}

TEST_CASE("neumann derivative vanishes once the extension is plugged in") {
    KernelConfig cfg(1, 0.3);
    auto mesh = small_mesh();
    DiscreteFunction u = interpolate(mesh, [](double r) { return std::min(r, 1.0) * std::min(r, 1.0); });
    for (std::size_t j = 0; j < mesh->n_exterior(); ++j) {
        double re = mesh->exterior_nodes[j];
        u.values()[mesh->n_interior() + j] = neumann_extension(cfg, u, re);
    }
    double sup = u.max_abs();
    for (std::size_t j = 0; j < mesh->n_exterior(); ++j) {
        double re = mesh->exterior_nodes[j];
        CHECK(std::abs(neumann_derivative(cfg, u, re)) < 1e-8 * sup);
    }
    // extension values bounded by interior range (maximum principle)
    for (std::size_t j = 0; j < mesh->n_exterior(); ++j) {
        double v = u.values()[mesh->n_interior() + j];
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("neumann derivative of a constant profile is zero") {
    KernelConfig cfg(2, 0.4);
    auto mesh = small_mesh();
    DiscreteFunction u(mesh, -1.7);
    CHECK(std::abs(neumann_derivative(cfg, u, 1.4)) < 1e-12);
}

TEST_CASE("neumann derivative of the boundary jump matches direct quadrature") {
    // u = 1 outside B, 0 inside; N_s u(2) = c_{1,s} int_{-1}^{1} (2-y)^{-1.6} dy
    KernelConfig cfg(1, 0.3);
    auto mesh = small_mesh();
    DiscreteFunction u(mesh, 0.0);
    for (std::size_t j = 0; j < mesh->n_exterior(); ++j)
        u.values()[mesh->n_interior() + j] = 1.0;
    double expected_integral = (1.0 - std::pow(3.0, -0.6)) / 0.6;  // exact antiderivative
    double oracle_integral =
        oracle::integrate([](double y) { return std::pow(2.0 - y, -1.6); }, -1.0, 1.0, 1e-14);
    CHECK(oracle_integral == doctest::Approx(expected_integral).epsilon(1e-12));
    CHECK(neumann_derivative(cfg, u, 2.0) ==
          doctest::Approx(cfg.c_ns * expected_integral).epsilon(1e-9));
}

TEST_CASE("pointwise operator annihilates constants") {
    KernelConfig cfg(1, 0.45);
    auto out = pointwise_fractional_laplacian(cfg, [](double) { return 1.0; }, 0.37);
    CHECK(std::abs(out.value) < 1e-10);
}

TEST_CASE("pointwise operator reproduces the Fourier symbol on cos") {
    // (-Delta)^{1/2} cos = cos on the line
    KernelConfig cfg(1, 0.5);
    cfg.pv_inner_radius = 1e-3;
    for (double r : {0.0, 0.4, 1.1}) {
        auto out = pointwise_fractional_laplacian(cfg, [](double x) { return std::cos(x); }, r);
        CHECK(out.value == doctest::Approx(std::cos(r)).epsilon(2e-4));
    }
}

TEST_CASE("pointwise operator is linear to within the reported error") {
    KernelConfig cfg(1, 0.5);
    auto u = [](double x) { return std::cos(x); };
    auto v = [](double x) { return 1.0 / (1.0 + x * x); };
    double a = 1.7, b = -0.6, r = 0.5;
    auto full = pointwise_fractional_laplacian(
        cfg, [&](double x) { return a * u(x) + b * v(x); }, r);
    auto pu = pointwise_fractional_laplacian(cfg, u, r);
    auto pv = pointwise_fractional_laplacian(cfg, v, r);
    double rhs = a * pu.value + b * pv.value;
    double budget = full.error_estimate + std::abs(a) * pu.error_estimate +
                    std::abs(b) * pv.error_estimate;
    CHECK(std::abs(full.value - rhs) <= budget);
    CHECK(std::abs(full.value - rhs) < 1e-4 * (1.0 + std::abs(full.value)));
}

TEST_CASE("pointwise operator rejects growing profiles") {
    KernelConfig cfg(1, 0.3);
    CHECK_THROWS_AS(
        pointwise_fractional_laplacian(cfg, [](double x) { return x * x * x; }, 0.5),
        std::domain_error);
}
