#include <catch2/catch_amalgamated.hpp>

#include "kenergy/functionals.hpp"

using namespace kenergy;

namespace {
struct Setup {
  Manifold M;
  QuadratureGrid G;
  explicit Setup(ManifoldKind kind, Resolution res) : M(Manifold::make(kind)), G(build_grid(M, res)) {}
};
}  // namespace

TEST_CASE("normalized Chern means match the closed forms", "[functionals]") {
  Setup s1(ManifoldKind::CP1, {32, 16});
  REQUIRE(mu_k(s1.M, s1.G, 1, 1) == Catch::Approx(1.0 / M_PI).epsilon(1e-10));
  Setup s2(ManifoldKind::CP2, {12, 8});
  REQUIRE(mu_k(s2.M, s2.G, 1, 1) == Catch::Approx(3.0 / (2.0 * M_PI)).epsilon(1e-9));
  REQUIRE(mu_k(s2.M, s2.G, 2, 1) ==
          Catch::Approx(3.0 / (4.0 * M_PI * M_PI)).epsilon(1e-9));
  Setup st(ManifoldKind::Torus, {16, 16});
  REQUIRE(std::abs(mu_k(st.M, st.G, 1, 1)) < 1e-12);
}

TEST_CASE("energy along a path is independent of the path", "[functionals]") {
  Setup s(ManifoldKind::CP1, {32, 16});
  RadialPolynomial a(1, {0.3, -0.1});
  RadialPolynomial b(1, {0.0, 0.15});
  RadialPolynomial detour(1, {-0.2, 0.0, 0.1});
  const double mu = mu_k(s.M, s.G, 1, 1);

  CombinationPath linear(
      s.M, {{&a, [](double t) { return t; }, [](double) { return 1.0; }},
            {&b, [](double t) { return t; }, [](double) { return 1.0; }}});
  CombinationPath bent(
      s.M, {{&a, [](double t) { return t * t * (3.0 - 2.0 * t); },
             [](double t) { return 6.0 * t * (1.0 - t); }},
            {&b, [](double t) { return t; }, [](double) { return 1.0; }}});
  CombinationPath swing(
      s.M, {{&a, [](double t) { return t; }, [](double) { return 1.0; }},
            {&b, [](double t) { return t; }, [](double) { return 1.0; }},
            {&detour, [](double t) { return std::sin(M_PI * t); },
             [](double t) { return M_PI * std::cos(M_PI * t); }}});

  const double e1 = k_energy_path(s.M, s.G, linear, 1, mu, 24, 1);
  const double e2 = k_energy_path(s.M, s.G, bent, 1, mu, 24, 1);
  const double e3 = k_energy_path(s.M, s.G, swing, 1, mu, 24, 1);
  REQUIRE(e2 == Catch::Approx(e1).epsilon(1e-9));
  REQUIRE(e3 == Catch::Approx(e1).epsilon(1e-9));
  REQUIRE(std::abs(e1) > 1e-4);  // not trivially zero
}

TEST_CASE("adding a constant does not change the energy", "[functionals]") {
  Setup s(ManifoldKind::CP1, {24, 12});
  RadialPolynomial a(1, {0.25, -0.05});
  ConstantField c(1, 0.37);
  const double mu = mu_k(s.M, s.G, 1, 1);
  CombinationPath plain = CombinationPath::segment(s.M, nullptr, &a);
  CombinationPath lifted(
      s.M, {{&a, [](double t) { return t; }, [](double) { return 1.0; }},
            {&c, [](double t) { return t; }, [](double) { return 1.0; }}});
  const double e0 = k_energy_path(s.M, s.G, plain, 1, mu, 16, 1);
  const double e1 = k_energy_path(s.M, s.G, lifted, 1, mu, 16, 1);
  // with mu computed on the same grid this holds to round-off
  REQUIRE(e1 == Catch::Approx(e0).margin(1e-12));
}

TEST_CASE("no-path formulas agree with the path integral", "[functionals]") {
  SECTION("cp1, k = 1 (both variants, tight)") {
    Setup s(ManifoldKind::CP1, {40, 16});
    RadialPolynomial phi(1, {0.3, -0.08});
    const double mu = mu_k(s.M, s.G, 1, 1);
    CombinationPath path = CombinationPath::segment(s.M, nullptr, &phi);
    const double via_path = k_energy_path(s.M, s.G, path, 1, mu, 24, 1);
    const double via_base =
        k_energy_nopath(s.M, s.G, phi, 1, mu, 24, 1, NoPathVariant::BaseChern);
    const double via_end =
        k_energy_nopath(s.M, s.G, phi, 1, mu, 24, 1, NoPathVariant::EndpointChern);
    REQUIRE(via_base == Catch::Approx(via_path).epsilon(1e-9));
    REQUIRE(via_end == Catch::Approx(via_path).epsilon(1e-9));
  }
  SECTION("cp2, k = 1 and k = 2") {
    Setup s(ManifoldKind::CP2, {12, 8});
    AngularPotential phi(2, {{{1, 0}, {0, 1}, 1, cd(0.15, -0.1)}});
    for (int k : {1, 2}) {
      const double mu = mu_k(s.M, s.G, k, 1);
      CombinationPath path = CombinationPath::segment(s.M, nullptr, &phi);
      const double via_path = k_energy_path(s.M, s.G, path, k, mu, 16, 1);
      const double via_base =
          k_energy_nopath(s.M, s.G, phi, k, mu, 16, 1, NoPathVariant::BaseChern);
      const double via_end =
          k_energy_nopath(s.M, s.G, phi, k, mu, 16, 1, NoPathVariant::EndpointChern);
      REQUIRE(via_base == Catch::Approx(via_path).margin(1e-7));
      REQUIRE(via_end == Catch::Approx(via_path).margin(1e-7));
    }
  }
  SECTION("torus, k = 1") {
    Setup s(ManifoldKind::Torus, {24, 24});
    TorusFourier phi({{1, 0, 0.03, 0.0}, {0, 1, 0.0, 0.02}});
    const double mu = mu_k(s.M, s.G, 1, 1);
    CombinationPath path = CombinationPath::segment(s.M, nullptr, &phi);
    const double via_path = k_energy_path(s.M, s.G, path, 1, mu, 16, 1);
    const double via_base =
        k_energy_nopath(s.M, s.G, phi, 1, mu, 16, 1, NoPathVariant::BaseChern);
    REQUIRE(via_base == Catch::Approx(via_path).margin(1e-10));
    REQUIRE(std::abs(via_path) > 1e-8);
  }
}

TEST_CASE("cocycle relation", "[functionals]") {
  Setup s(ManifoldKind::CP1, {32, 16});
  RadialPolynomial phi(1, {0.3, -0.05});
  RadialPolynomial psi(1, {-0.15, 0.1});
  const double r = cocycle_residual(s.M, s.G, phi, psi, 1, 24, 1);
  REQUIRE(std::abs(r) < 1e-9);
}

TEST_CASE("fixed-time identity vanishes along paths", "[functionals]") {
  SECTION("k = 1 on cp1") {
    Setup s(ManifoldKind::CP1, {32, 16});
    RadialPolynomial a(1, {0.3, -0.1});
    CombinationPath path = CombinationPath::segment(s.M, nullptr, &a);
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0})
      REQUIRE(std::abs(fixed_time_identity(s.M, s.G, path, 1, t, 1)) < 1e-12);
  }
  SECTION("k = 2 on cp2") {
    // the identity's quadrature error is governed by the angular rule here:
    // angular 8 leaves ~1e-9, angular 10 reaches ~3e-12
    Setup s(ManifoldKind::CP2, {12, 10});
    AngularPotential a(2, {{{1, 0}, {0, 1}, 1, cd(0.2, 0.1)}});
    CombinationPath path = CombinationPath::segment(s.M, nullptr, &a);
    for (double t : {0.0, 0.5, 1.0})
      REQUIRE(std::abs(fixed_time_identity(s.M, s.G, path, 2, t, 1)) < 1e-9);
  }
}

TEST_CASE("closed loops have zero energy", "[functionals]") {
  Setup s(ManifoldKind::CP1, {32, 16});
  RadialPolynomial a(1, {0.4, -0.1});
  RadialPolynomial b(1, {0.0, 0.2});
  const double mu = mu_k(s.M, s.G, 1, 1);
  CombinationPath loop(
      s.M, {{&a, [](double t) { return std::sin(M_PI * t); },
             [](double t) { return M_PI * std::cos(M_PI * t); }},
            {&b, [](double t) { return t * (1.0 - t); },
             [](double t) { return 1.0 - 2.0 * t; }}});
  REQUIRE(std::abs(k_energy_path(s.M, s.G, loop, 1, mu, 32, 1)) < 1e-10);
}

TEST_CASE("critical residual at the reference metric", "[functionals]") {
  Setup s1(ManifoldKind::CP1, {32, 16});
  REQUIRE(critical_residual(s1.M, s1.G, nullptr, 1, mu_k(s1.M, s1.G, 1, 1), 1) < 1e-12);
  Setup s2(ManifoldKind::CP2, {10, 6});
  REQUIRE(critical_residual(s2.M, s2.G, nullptr, 1, mu_k(s2.M, s2.G, 1, 1), 1) < 1e-12);
  REQUIRE(critical_residual(s2.M, s2.G, nullptr, 2, mu_k(s2.M, s2.G, 2, 1), 1) < 1e-12);
  // perturbed metric is not critical
  RadialPolynomial phi(1, {0.3, -0.1});
  REQUIRE(critical_residual(s1.M, s1.G, &phi, 1, mu_k(s1.M, s1.G, 1, 1), 1) > 1e-3);
}

TEST_CASE("analytic gradient matches finite differences", "[functionals]") {
  Setup s(ManifoldKind::CP1, {24, 12});
  RadialPolynomial b1(1, {1.0});
  RadialPolynomial b2(1, {0.0, 1.0});
  std::vector<const ScalarField*> basis = {&b1, &b2};
  std::vector<double> coeff = {0.2, -0.07};
  const double mu = mu_k(s.M, s.G, 1, 1);
  auto E = [&](const std::vector<double>& c) {
    LinearCombination f(1, {{c[0], &b1}, {c[1], &b2}});
    return k_energy_nopath(s.M, s.G, f, 1, mu, 16, 1, NoPathVariant::BaseChern);
  };
  const auto grad = k_energy_gradient(s.M, s.G, basis, coeff, 1, mu, 1);
  const double h = 1e-5;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    auto cp = coeff, cm = coeff;
    cp[j] += h;
    cm[j] -= h;
    const double fd = (E(cp) - E(cm)) / (2.0 * h);
    REQUIRE(grad[j] == Catch::Approx(fd).margin(1e-8));
  }
}

TEST_CASE("descent reaches the critical metric on cp1", "[functionals]") {
  Setup s(ManifoldKind::CP1, {24, 12});
  RadialPolynomial b1(1, {1.0});
  RadialPolynomial b2(1, {0.0, 1.0});
  RadialPolynomial b3(1, {0.0, 0.0, 1.0});
  std::vector<const ScalarField*> basis = {&b1, &b2, &b3};
  DescentOptions opt;
  opt.k = 1;
  opt.max_steps = 120;
  opt.target_residual = 1e-4;
  DescentResult r = descend(s.M, s.G, basis, {0.25, -0.1, 0.05}, opt, 1);
  REQUIRE(r.converged);
  // monotone energies
  for (std::size_t i = 1; i < r.trajectory.size(); ++i)
    REQUIRE(r.trajectory[i].energy <= r.trajectory[i - 1].energy + 1e-13);
  REQUIRE(r.trajectory.back().residual <= 1e-4);
}
