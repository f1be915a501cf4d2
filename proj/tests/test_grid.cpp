#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "fraclap/grid.hpp"
#include "fraclap/io.hpp"

using namespace fraclap;
using Catch::Approx;

TEST_CASE("build_grid interior node counts") {
  const UniformGrid g1 =
      build_grid(CylinderDomain{1.0, CrossSection{1.0}}, 0.5);
  CHECK(g1.n1() == 3);
  CHECK(g1.n2() == 3);

  const UniformGrid g2 =
      build_grid(CylinderDomain{2.0, CrossSection{1.0}}, 0.5);
  CHECK(g2.n1() == 7);
  CHECK(g2.n2() == 3);
}

TEST_CASE("build_grid rejects non-divisible spacings naming the axis") {
  try {
    build_grid(CylinderDomain{1.0, CrossSection{1.0}}, 0.3);
    FAIL("expected GeometryError");
  } catch (const GeometryError& e) {
    CHECK(std::string(e.what()).find("x1") != std::string::npos);
  }
  CHECK_THROWS_AS(build_grid(CrossSection{1.0}, 0.3), GeometryError);
}

TEST_CASE("l2 norm over masks: exact measures for the constant function") {
  // Host grid larger than the masks so mask faces are interior nodes.
  const UniformGrid g = build_grid(CylinderDomain{6.0, CrossSection{2.0}},
                                   1.0 / 8.0);

  SECTION("unit cylinder has measure 4") {
    const SubdomainMask omega1 = SubdomainMask::cylinder(1.0, 1.0);
    GridFunction u = GridFunction::zeros(g);
    for (int i = 0; i < g.n1(); ++i) {
      for (int j = 0; j < g.n2(); ++j) {
        if (std::abs(g.axis(0).node(i)) <= 1.0 + 1e-12 &&
            std::abs(g.axis(1).node(j)) <= 1.0 + 1e-12) {
          u.v[g.index(i, j)] = 1.0;
        }
      }
    }
    CHECK(l2_norm_sq_on(u, omega1) == Approx(4.0).epsilon(1e-13));
  }

  SECTION("the two end slabs have measure 4 in total") {
    const SubdomainMask ring = SubdomainMask::ring(4.0, 1.0);
    GridFunction u = GridFunction::zeros(g);
    for (int i = 0; i < g.n1(); ++i) {
      for (int j = 0; j < g.n2(); ++j) {
        const double x1 = g.axis(0).node(i);
        if (std::abs(x1) >= 3.0 - 1e-12 && std::abs(x1) <= 4.0 + 1e-12 &&
            std::abs(g.axis(1).node(j)) <= 1.0 + 1e-12) {
          u.v[g.index(i, j)] = 1.0;
        }
      }
    }
    CHECK(l2_norm_sq_on(u, ring) == Approx(4.0).epsilon(1e-13));
  }

  SECTION("zero function has zero norm") {
    const GridFunction u = GridFunction::zeros(g);
    CHECK(l2_norm_sq_on(u, SubdomainMask::cylinder(2.0, 1.0)) == 0.0);
  }
}

TEST_CASE("mask quadrature is additive and monotone") {
  const UniformGrid g = build_grid(CylinderDomain{4.0, CrossSection{1.0}},
                                   1.0 / 8.0);
  const GridFunction u = GridFunction::sample(g, [](double x, double y) {
    return std::cos(0.7 * x) * (1.0 + 0.3 * y);
  });
  const double whole = l2_norm_sq_on(u, SubdomainMask::cylinder(4.0, 1.0));
  const double inner = l2_norm_sq_on(u, SubdomainMask::cylinder(3.0, 1.0));
  const double ring = l2_norm_sq_on(u, SubdomainMask::ring(4.0, 1.0));
  CHECK(whole == Approx(inner + ring).epsilon(1e-13));

  const double small = l2_norm_sq_on(u, SubdomainMask::cylinder(2.0, 1.0));
  CHECK(small <= inner);
  CHECK(inner <= whole);
}

TEST_CASE("misaligned mask edges are rejected") {
  const UniformGrid g = build_grid(CylinderDomain{2.0, CrossSection{1.0}},
                                   1.0 / 8.0);
  const GridFunction u = GridFunction::zeros(g);
  CHECK_THROWS_AS(l2_norm_sq_on(u, SubdomainMask::cylinder(1.03, 1.0)),
                  GeometryError);
}

TEST_CASE("quadrature consistency: halving h converges at second order") {
  auto profile = [](double x, double y) {
    return std::sin(x) * std::cos(1.3 * y);
  };
  const double exact_band = 2.0;  // integrate over Omega_2 inside Omega_4
  std::vector<double> vals;
  for (double h : {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    const UniformGrid g = build_grid(CylinderDomain{4.0, CrossSection{1.0}}, h);
    const GridFunction u = GridFunction::sample(g, profile);
    vals.push_back(
        l2_norm_sq_on(u, SubdomainMask::cylinder(exact_band, 1.0)));
  }
  for (std::size_t i = 0; i + 2 < vals.size(); ++i) {
    const double d1 = std::abs(vals[i] - vals[i + 1]);
    const double d2 = std::abs(vals[i + 1] - vals[i + 2]);
    const double ratio = d1 / d2;
    CHECK(ratio >= 2.0);
    CHECK(ratio <= 6.0);
  }
}

TEST_CASE("strict inclusion of the alpha-scaled cylinder") {
  const UniformGrid g = build_grid(CylinderDomain{4.0, CrossSection{1.0}},
                                   1.0 / 4.0);
  const SubdomainMask inner = SubdomainMask::cylinder(2.0, 1.0);
  const SubdomainMask outer = SubdomainMask::cylinder(4.0, 1.0);
  int n_inner = 0, n_outer = 0;
  for (int i = 0; i < g.n1(); ++i) {
    for (int j = 0; j < g.n2(); ++j) {
      if (inner.node_weight(g, i, j) > 0.0) ++n_inner;
      if (outer.node_weight(g, i, j) > 0.0) ++n_outer;
    }
  }
  CHECK(n_inner > 0);
  CHECK(n_inner < n_outer);
}

TEST_CASE("restrict_extend copies shared nodes and zero-fills the rest") {
  const UniformGrid g4 = build_grid(CylinderDomain{4.0, CrossSection{1.0}},
                                    1.0 / 4.0);
  const UniformGrid g8 = build_grid(CylinderDomain{8.0, CrossSection{1.0}},
                                    1.0 / 4.0);
  const GridFunction u = GridFunction::sample(
      g4, [](double x, double y) { return x + 10.0 * y; });
  const GridFunction big = restrict_extend(u, g8);
  for (int i = 0; i < g8.n1(); ++i) {
    for (int j = 0; j < g8.n2(); ++j) {
      const double x1 = g8.axis(0).node(i);
      const double x2 = g8.axis(1).node(j);
      const double expect = std::abs(x1) < 4.0 ? x1 + 10.0 * x2 : 0.0;
      REQUIRE(big.v[g8.index(i, j)] == Approx(expect).margin(1e-12));
    }
  }

  SECTION("restrict of extend is the identity on the smaller support") {
    const GridFunction back = restrict_extend(big, g4);
    for (std::size_t k = 0; k < u.v.size(); ++k) {
      REQUIRE(back.v[k] == u.v[k]);
    }
  }

  SECTION("non-nested grids are rejected") {
    const UniformGrid shifted = UniformGrid::box(-4.1, 3.9, -1.0, 1.0, 0.25);
    CHECK_THROWS_AS(restrict_extend(u, shifted), GeometryError);
    const UniformGrid finer = build_grid(
        CylinderDomain{4.0, CrossSection{1.0}}, 1.0 / 8.0);
    CHECK_THROWS_AS(restrict_extend(u, finer), GeometryError);
  }
}

TEST_CASE("extrusion repeats the profile across every x1 row") {
  const UniformGrid omega = build_grid(CrossSection{1.0}, 1.0 / 4.0);
  const GridFunction prof =
      GridFunction::sample(omega, [](double t) { return t * t - 0.3; });
  const UniformGrid g = build_grid(CylinderDomain{2.0, CrossSection{1.0}},
                                   1.0 / 4.0);
  const GridFunction ext = extrude(prof, g);
  for (int j = 0; j < g.n2(); ++j) {
    const double v0 = ext.v[g.index(0, j)];
    CHECK(v0 == Approx(prof.v[static_cast<std::size_t>(j)]).margin(0));
    for (int i = 1; i < g.n1(); ++i) {
      REQUIRE(ext.v[g.index(i, j)] == v0);
    }
  }
}

TEST_CASE("grid function CSV round trip at 17 significant digits") {
  const UniformGrid omega = build_grid(CrossSection{1.0}, 1.0 / 8.0);
  const GridFunction u = GridFunction::sample(
      omega, [](double t) { return std::sin(137.0 * t) / 3.0; });
  const std::string csv = io::grid_function_csv(u);

  const auto dir = std::filesystem::temp_directory_path() / "fraclap_grid";
  std::filesystem::create_directories(dir);
  const auto path = dir / "prof.csv";
  io::atomic_write(path, csv);
  const GridFunction back = io::read_profile_csv(path);
  REQUIRE(back.grid.same_layout(u.grid));
  for (std::size_t k = 0; k < u.v.size(); ++k) {
    REQUIRE(back.v[k] == u.v[k]);  // bit-exact via %.17g
  }
}
