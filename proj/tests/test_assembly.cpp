#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "fracneu/assembly.hpp"
#include "fracneu/quadrature.hpp"
#include "oracle_utils.hpp"

using namespace fracneu;

namespace {

BilinearForms& cached_forms(double s = 0.3) {
    static std::map<double, BilinearForms> cache;
    auto it = cache.find(s);
    if (it == cache.end()) {
        RadialMesh mesh = build_mesh(64, 16, 8.0, 2.0);
        KernelConfig cfg(1, s);
        it = cache.emplace(s, assemble_forms(mesh, cfg)).first;
    }
    return it->second;
}

}  // namespace

TEST_CASE("gauss-jacobi rule integrates the weighted monomials exactly") {
    // int_0^L h^alpha h^k dh = L^{alpha+k+1}/(alpha+k+1)
    double alpha = 1.0 - 2.0 * 0.45, L = 0.37;
    QuadRule q = mapped_gauss_jacobi(12, alpha, L);
    for (int k = 0; k <= 8; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) acc += q.w[i] * std::pow(q.x[i], k);
        double exact = std::pow(L, alpha + k + 1.0) / (alpha + k + 1.0);
        CHECK(acc == doctest::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("stiffness kills constants and is symmetric") {
    const BilinearForms& f = cached_forms();
    const auto& S = f.stiffness;
    CHECK((S - S.transpose()).cwiseAbs().maxCoeff() == 0.0);  // built symmetric
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(S.rows());
    double scale = S.cwiseAbs().rowwise().sum().maxCoeff();
    CHECK((S * ones).cwiseAbs().maxCoeff() < 1e-12 * scale);
}

TEST_CASE("mass matrix integrates the ball volume") {
    const BilinearForms& f = cached_forms();
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(f.mass.rows());
    CHECK(ones.dot(f.mass * ones) == doctest::Approx(2.0).epsilon(1e-12));  // |B| in 1d
    CHECK(f.lumped_mass.sum() == doctest::Approx(2.0).epsilon(1e-12));
    // SPD on interior block
    Eigen::VectorXd v = Eigen::VectorXd::Random(f.n_interior());
    Eigen::VectorXd vfull = Eigen::VectorXd::Zero(f.n_total());
    vfull.head(f.n_interior()) = v;
    CHECK(vfull.dot(f.mass * vfull) > 0.0);
}

TEST_CASE("seminorm of constants vanishes, quadratic scaling holds") {
    const BilinearForms& f = cached_forms();
    DiscreteFunction c(f.mesh, 4.2);
    double scale = f.stiffness.cwiseAbs().maxCoeff();
    CHECK(std::abs(seminorm_sq(f, c)) < 1e-10 * scale);
    DiscreteFunction u = interpolate(f.mesh, [](double r) { return std::min(r, 8.0); });
    double s1 = seminorm_sq(f, u);
    DiscreteFunction u2 = u;
    for (auto& v : u2.values()) v *= 3.0;
    CHECK(seminorm_sq(f, u2) == doctest::Approx(9.0 * s1).epsilon(1e-13));
    CHECK(s1 > 0.0);
}

TEST_CASE("parallel assembly is bit-identical to the serial reference") {
    RadialMesh mesh = build_mesh(32, 8, 6.0, 2.0);
    KernelConfig cfg(1, 0.4);
    AssemblyOptions opts;
    opts.estimate_error = false;
    BilinearForms a = assemble_forms(mesh, cfg, opts);
    BilinearForms b = assemble_forms_reference(mesh, cfg, opts);
    CHECK((a.stiffness - b.stiffness).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.mass - b.mass).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("seminorm of u(r)=r matches a Monte-Carlo double-integral oracle") {
    // [u]^2 = (c/2) iint_{R^2 \ (B^c)^2} (u(x)-u(y))^2 |x-y|^{-1.6} dx dy with
    // u(x) = min(|x|, R_ext) — exactly the piecewise-linear interpolant.
    const double s = 0.3, R = 8.0;
    RadialMesh mesh = build_mesh(128, 32, R, 2.0);
    KernelConfig cfg(1, s);
    BilinearForms f = assemble_forms(mesh, cfg);
    DiscreteFunction u = interpolate(f.mesh, [&](double r) { return std::min(r, R); });
    double discrete = seminorm_sq(f, u);

    auto uval = [&](double x) { return std::min(std::abs(x), R); };
    // importance sampling: x uniform on B, y from the heavy-tailed density
    // p(y) = 0.3 (1+|y|)^{-1.6} / 2 on the line; domain split
    //   D = (B x R) + (B^c x B) = 2 (B x R) - (B x B)  by symmetry.
    std::mt19937_64 rng(987654321);
    std::uniform_real_distribution<double> ux(-1.0, 1.0);
    std::uniform_real_distribution<double> uu(0.0, 1.0);
    const long N = 2000000;
    double acc_bxr = 0.0, acc_bxb = 0.0;
    for (long k = 0; k < N; ++k) {
        double x = ux(rng);
        {
            double v = uu(rng);
            double ay = std::pow(1.0 - v, -1.0 / 0.6) - 1.0;
            double y = (uu(rng) < 0.5 ? -1.0 : 1.0) * ay;
            double pdf = 0.3 * std::pow(1.0 + ay, -1.6);
            double du = uval(x) - uval(y);
            if (x != y) acc_bxr += du * du * std::pow(std::abs(x - y), -1.6) / pdf * 0.5;
        }
        {
            double y = ux(rng);
            double du = uval(x) - uval(y);
            if (x != y) acc_bxb += du * du * std::pow(std::abs(x - y), -1.6) * 0.5;
        }
    }
    // uniform-on-B densities are 1/2 each; (B x R): weight 2/N per sample
    double I_bxr = acc_bxr * 2.0 / N * 2.0;
    double I_bxb = acc_bxb * 2.0 / N * 2.0 * 2.0;
    double mc = 0.5 * cfg.c_ns * (2.0 * I_bxr - I_bxb);
    CHECK(discrete == doctest::Approx(mc).epsilon(2e-3));
}

TEST_CASE("seminorm of a boundary hat decreases under refinement toward a limit") {
    double prev = -1.0;
    double vals[3];
    int idx = 0;
    for (int ni : {32, 64, 128}) {
        RadialMesh mesh = build_mesh(ni, 16, 8.0, 2.0);
        KernelConfig cfg(1, 0.3);
        BilinearForms f = assemble_forms(mesh, cfg);
        // hat at the boundary node r=1
        DiscreteFunction u(f.mesh, 0.0);
        u.values()[mesh.n_interior() - 1] = 1.0;
        vals[idx++] = seminorm_sq(f, u);
    }
    CHECK(vals[0] > vals[1]);
    CHECK(vals[1] > vals[2]);
    CHECK(vals[0] > 0.0);
}

TEST_CASE("weak residual: constants are exact discrete solutions") {
    const BilinearForms& f = cached_forms();
    ProblemParams p;
    p.n = 1;
    p.s = 0.3;
    p.d = 0.7;
    p.q = 3.0;
    SUBCASE("u == 1") {
        DiscreteFunction one(f.mesh, 1.0);
        Eigen::VectorXd res = weak_residual(f, p, one);
        double scale = weak_residual_scale(f, p, one);
        CHECK(res.cwiseAbs().maxCoeff() < 1e-12 * scale);
    }
    SUBCASE("u == 0") {
        DiscreteFunction zero(f.mesh, 0.0);
        Eigen::VectorXd res = weak_residual(f, p, zero);
        CHECK(res.cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("u == 2, q = 3: interior rows are -2 lumped, exterior rows vanish") {
        DiscreteFunction two(f.mesh, 2.0);
        Eigen::VectorXd res = weak_residual(f, p, two);
        for (std::size_t i = 0; i < f.n_interior(); ++i)
            CHECK(res(i) == doctest::Approx(-2.0 * f.lumped_mass(i)).epsilon(1e-10));
        for (std::size_t i = f.n_interior(); i < f.n_total(); ++i)
            CHECK(std::abs(res(i)) < 1e-10);
    }
    SUBCASE("magnitude cap") {
        DiscreteFunction big(f.mesh, 1e13);
        CHECK_THROWS_AS(weak_residual(f, p, big), std::overflow_error);
    }
}

TEST_CASE("discrete norm equivalence min{1,d}") {
    const BilinearForms& f = cached_forms();
    std::mt19937_64 rng(4);
    std::normal_distribution<double> gauss;
    for (double d : {0.25, 1.0, 4.0}) {
        for (int k = 0; k < 10; ++k) {
            DiscreteFunction u(f.mesh, 0.0);
            for (auto& v : u.values()) v = gauss(rng);
            Eigen::Map<const Eigen::VectorXd> vv(u.values().data(), u.size());
            double sem = seminorm_sq(f, u), mass = vv.dot(f.mass * vv);
            CHECK(d * sem + mass >= std::min(1.0, d) * (sem + mass) - 1e-12);
        }
    }
}

TEST_CASE("integration by parts identity on smooth profiles") {
    RadialMesh coarse = build_mesh(48, 16, 8.0, 2.0);
    RadialMesh fine = build_mesh(96, 32, 8.0, 2.0);
    KernelConfig cfg(1, 0.4);
    auto u = [](double r) { return 1.0 - r * r; };
    auto v = [](double r) { return r * r; };
    BilinearForms fc = assemble_forms(coarse, cfg);
    BilinearForms ff = assemble_forms(fine, cfg);
    double dc = check_integration_by_parts(fc, cfg, u, v);
    double df = check_integration_by_parts(ff, cfg, u, v);
    CHECK(df < dc);  // decreases under refinement
    CHECK(dc / df >= 1.8);
    // u = v: both sides equal the seminorm
    DiscreteFunction uh = interpolate(fc.mesh, [&](double r) { return u(std::min(r, 8.0)); });
    double sem = seminorm_sq(fc, uh);
    double disc = check_integration_by_parts(fc, cfg, u, u);
    CHECK(disc < 0.05 * std::abs(sem));
}

TEST_CASE("quadrature error gate triggers on absurd tolerance") {
    RadialMesh mesh = build_mesh(16, 6, 4.0, 2.0);
    KernelConfig cfg(1, 0.45);
    AssemblyOptions opts;
    opts.quadrature_tolerance = 1e-30;
    CHECK_THROWS(assemble_forms(mesh, cfg, opts));
}
