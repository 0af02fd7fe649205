#include <catch2/catch_amalgamated.hpp>

#include "kenergy/grid.hpp"
#include "kenergy/potentials.hpp"

using namespace kenergy;

TEST_CASE("grid volumes match the analytic values", "[grid]") {
  for (auto kind : {ManifoldKind::CP1, ManifoldKind::CP2, ManifoldKind::Torus}) {
    Manifold M = Manifold::make(kind);
    Resolution res{kind == ManifoldKind::CP2 ? 12 : 32, kind == ManifoldKind::CP2 ? 8 : 32};
    QuadratureGrid G = build_grid(M, res);  // build_grid self-checks to 1e-8
    Accum vol;
    for (std::size_t i = 0; i < G.size(); ++i)
      vol.add(G.weights[i] * base_volume_density(M, G.nodes[i]));
    REQUIRE(vol.total() == Catch::Approx(M.volume).epsilon(1e-10));
  }
}

TEST_CASE("radial-reduced grids agree with full grids on invariant integrands", "[grid]") {
  SECTION("cp1") {
    Manifold M = Manifold::make(ManifoldKind::CP1);
    QuadratureGrid full = build_grid(M, {24, 24});
    QuadratureGrid red = build_grid(M, {24, 8}, true);
    auto f = [&](const QuadratureGrid& G) {
      return integrate_density(G, 1, [&](std::size_t i) {
        return global_u(1, G.nodes[i]) * base_volume_density(M, G.nodes[i]);
      });
    };
    REQUIRE(f(full) == Catch::Approx(f(red)).epsilon(1e-12));
    // \int u omega = 2 pi * 1/2 = pi for u = s/(1+s) on cp1
    REQUIRE(f(red) == Catch::Approx(M_PI).epsilon(1e-10));
  }
  SECTION("cp2") {
    Manifold M = Manifold::make(ManifoldKind::CP2);
    QuadratureGrid full = build_grid(M, {16, 8});
    QuadratureGrid red = build_grid(M, {16, 8}, true);
    auto f = [&](const QuadratureGrid& G) {
      return integrate_density(G, 1, [&](std::size_t i) {
        // 1/(1+|z|^2) in the base chart is the global function 1 - u
        return (1.0 - global_u(2, G.nodes[i])) * base_volume_density(M, G.nodes[i]);
      });
    };
    REQUIRE(f(full) == Catch::Approx(f(red)).epsilon(1e-11));
  }
}

TEST_CASE("angular resolution integrates the relevant Fourier modes exactly", "[grid]") {
  Manifold M = Manifold::make(ManifoldKind::CP1);
  QuadratureGrid G = build_grid(M, {24, 16});
  // z^2 zbar / (1+s)^2 integrates to zero by rotation invariance; the rule
  // must see that exactly (mode 1 < angular count).
  const double v = integrate_density(G, 1, [&](std::size_t i) {
    const cd z = G.nodes[i].z[0];
    const double s = std::norm(z);
    return (z * z * std::conj(z)).real() / ((1.0 + s) * (1.0 + s)) *
           base_volume_density(M, G.nodes[i]);
  });
  REQUIRE(std::abs(v) < 1e-13);
}

TEST_CASE("fields are chart-covariant: same global point, same value", "[grid]") {
  SECTION("cp1: chart 1 carries w = 1/z") {
    RadialPolynomial f(1, {0.3, -0.2, 0.1});
    AngularPotential a(1, {AngularTerm{{1, 0}, {0, 0}, 1, cd(0.4, 0.2)},
                           AngularTerm{{2, 0}, {1, 0}, 2, cd(-0.3, 0.1)}});
    ChartPoint p0;
    p0.z[0] = cd(1.7, -0.6);
    ChartPoint p1;
    p1.chart = 1;
    p1.z[0] = 1.0 / p0.z[0];
    REQUIRE(f.value(p0) == Catch::Approx(f.value(p1)).epsilon(1e-14));
    REQUIRE(a.value(p0) == Catch::Approx(a.value(p1)).epsilon(1e-13));
    REQUIRE(f.jet(p1).value().real() == Catch::Approx(f.value(p0)).epsilon(1e-13));
    REQUIRE(a.jet(p1).value().real() == Catch::Approx(a.value(p0)).epsilon(1e-13));
  }
  SECTION("cp2: charts 1 and 2 divide by the dominant coordinate") {
    RadialPolynomial f(2, {0.2, 0.05});
    AngularPotential a(2, {AngularTerm{{1, 0}, {0, 1}, 2, cd(0.3, -0.2)},
                           AngularTerm{{1, 1}, {0, 0}, 2, cd(0.1, 0.5)}});
    ChartPoint p0;
    p0.z[0] = cd(1.9, 0.4);
    p0.z[1] = cd(-0.8, 1.1);
    ChartPoint p1;
    p1.chart = 1;
    p1.z[0] = 1.0 / p0.z[0];
    p1.z[1] = p0.z[1] / p0.z[0];
    ChartPoint p2;
    p2.chart = 2;
    p2.z[0] = 1.0 / p0.z[1];
    p2.z[1] = p0.z[0] / p0.z[1];
    for (const ChartPoint* q : {&p1, &p2}) {
      REQUIRE(f.value(*q) == Catch::Approx(f.value(p0)).epsilon(1e-13));
      REQUIRE(a.value(*q) == Catch::Approx(a.value(p0)).epsilon(1e-13));
      REQUIRE(f.jet(*q).value().real() == Catch::Approx(f.value(p0)).epsilon(1e-13));
      REQUIRE(a.jet(*q).value().real() == Catch::Approx(a.value(p0)).epsilon(1e-13));
    }
  }
}

TEST_CASE("resolution floors are enforced", "[grid]") {
  Manifold M = Manifold::make(ManifoldKind::CP1);
  REQUIRE_THROWS_AS(build_grid(M, {4, 32}), GridError);
  REQUIRE_THROWS_AS(build_grid(M, {32, 4}), GridError);
  Manifold T = Manifold::make(ManifoldKind::Torus);
  REQUIRE_THROWS_AS(build_grid(T, {4, 4}), GridError);
  REQUIRE_THROWS_AS(build_grid(T, {16, 16}, true), GridError);
}

TEST_CASE("integration rejects non-finite integrands", "[grid]") {
  Manifold M = Manifold::make(ManifoldKind::Torus);
  QuadratureGrid G = build_grid(M, {8, 8});
  REQUIRE_THROWS_AS(
      integrate_density(G, 1, [](std::size_t i) { return i == 3 ? std::nan("") : 1.0; }),
      NumericsError);
}

TEST_CASE("deterministic summation is thread-count independent", "[grid]") {
  Manifold M = Manifold::make(ManifoldKind::CP1);
  QuadratureGrid G = build_grid(M, {64, 64});
  auto dens = [&](std::size_t i) {
    const double s = std::norm(G.nodes[i].z[0]);
    return std::sin(7.0 * s / (1.0 + s)) * base_volume_density(M, G.nodes[i]);
  };
  const double v1 = integrate_density(G, 1, dens);
  const double v4 = integrate_density(G, 4, dens);
  REQUIRE(v1 == v4);  // bit-identical
}
