#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fracneu/mesh.hpp"

using namespace fracneu;

TEST_CASE("build_mesh basics") {
    RadialMesh m = build_mesh(8, 4, 4.0, 2.0);
    CHECK(m.n_nodes() == 12);
    CHECK(m.interior_nodes.front() == 0.0);
    CHECK(m.interior_nodes.back() == 1.0);
    CHECK(m.exterior_nodes.back() == 4.0);
    // grading 2 clusters exterior nodes toward 1
    double g1 = m.exterior_nodes[0] - 1.0;
    double g2 = m.exterior_nodes[1] - m.exterior_nodes[0];
    CHECK(g1 < g2);
    CHECK_THROWS(build_mesh(4, 4, 4.0, 2.0));
    CHECK_THROWS(build_mesh(8, 2, 4.0, 2.0));
    CHECK_THROWS(build_mesh(8, 4, 0.5, 2.0));
    CHECK_THROWS(build_mesh(8, 4, 4.0, 0.5));
}

TEST_CASE("grading 1 gives uniform exterior spacing") {
    RadialMesh m = build_mesh(8, 4, 4.0, 1.0);
    double h = m.exterior_nodes[1] - m.exterior_nodes[0];
    for (std::size_t j = 1; j + 1 < m.exterior_nodes.size(); ++j)
        CHECK(m.exterior_nodes[j + 1] - m.exterior_nodes[j] == doctest::Approx(h).epsilon(1e-12));
    CHECK(m.exterior_nodes[0] - 1.0 == doctest::Approx(h).epsilon(1e-12));
}

TEST_CASE("doubling the interior nests the node set") {
    RadialMesh coarse = build_mesh(9, 4, 4.0, 2.0);
    RadialMesh fine = build_mesh(17, 4, 4.0, 2.0);
    for (std::size_t i = 0; i < coarse.n_interior(); ++i) {
        double r = coarse.interior_nodes[i];
        bool found = false;
        for (double rf : fine.interior_nodes)
            if (std::abs(rf - r) < 1e-14) found = true;
        CHECK(found);
    }
}

TEST_CASE("piecewise linear interpolation with constant tail") {
    auto mesh = std::make_shared<RadialMesh>(build_mesh(11, 4, 2.0, 1.0));
    DiscreteFunction u = interpolate(mesh, [](double r) { return 2.0 * r; });
    CHECK(u.value_at(0.05) == doctest::Approx(0.1).epsilon(1e-13));
    CHECK(u.value_at(0.5) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(u.value_at(1.1) == doctest::Approx(2.2).epsilon(1e-13));
    CHECK(u.value_at(2.0) == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(u.value_at(50.0) == doctest::Approx(4.0).epsilon(1e-13));  // constant beyond R_ext
}

TEST_CASE("profile round-trip is bit-exact") {
    auto mesh = std::make_shared<RadialMesh>(build_mesh(16, 6, 8.0, 2.0));
    DiscreteFunction u = interpolate(mesh, [](double r) { return std::sin(3.0 * r) / 3.0 + 1e-17 * r; });
    std::ostringstream os;
    write_profile(os, u, 1, 0.45);
    std::istringstream is(os.str());
    StoredProfile back = read_profile(is);
    CHECK(back.n == 1);
    CHECK(back.s == 0.45);
    REQUIRE(back.u.size() == u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        CHECK(back.u.mesh().node(i) == u.mesh().node(i));  // exact
        CHECK(back.u[i] == u[i]);                          // exact
    }
    // a second pass through the format is byte-identical
    std::ostringstream os2;
    write_profile(os2, back.u, back.n, back.s);
    CHECK(os.str() == os2.str());
}

TEST_CASE("read_profile rejects garbage") {
    std::istringstream is("not a profile\n0 1\n");
    CHECK_THROWS(read_profile(is));
}
