#include <catch2/catch_amalgamated.hpp>

#include "kenergy/futaki.hpp"

using namespace kenergy;

namespace {

// A generic traceless-free gl(2) block embedded in the 3x3 storage.
std::array<std::array<cd, 3>, 3> generic2() {
  std::array<std::array<cd, 3>, 3> m{};
  m[0][0] = cd(0.1, -0.2);
  m[0][1] = cd(0.4, 0.3);
  m[1][0] = cd(-0.5, 0.2);
  m[1][1] = cd(0.7, 0.6);
  return m;
}

// A generic gl(3) matrix: every entry nonzero, no special symmetry.
std::array<std::array<cd, 3>, 3> generic3() {
  std::array<std::array<cd, 3>, 3> m{};
  m[0][0] = cd(0.1, -0.2);
  m[0][1] = cd(0.4, 0.3);
  m[0][2] = cd(-0.3, 0.1);
  m[1][0] = cd(-0.5, 0.2);
  m[1][1] = cd(0.7, 0.6);
  m[1][2] = cd(0.2, -0.4);
  m[2][0] = cd(0.3, 0.15);
  m[2][1] = cd(-0.1, 0.25);
  m[2][2] = cd(-0.6, 0.35);
  return m;
}

// Volume-weighted mean of a node-indexed function against the metric of
// base + phi, so closed-form potentials can be compared with the
// mean-normalized output of solve_theta.
cd volume_mean(const Manifold& M, const QuadratureGrid& G, const ScalarField* phi,
               const std::vector<cd>& f) {
  BasePotentialField base(M);
  const auto& bj = base.jets_on(G);
  const std::vector<PotentialJets>* pj = phi ? &phi->jets_on(G) : nullptr;
  Accum re, im, vol;
  for (std::size_t i = 0; i < G.size(); ++i) {
    PotentialJets tot = bj[i];
    if (pj) tot.axpy(1.0, (*pj)[i]);
    const double dens =
        top_density(wedge_pow(omega_form(metric_from_jets(tot, M.n)), M.n));
    re.add(G.weights[i] * dens * f[i].real());
    im.add(G.weights[i] * dens * f[i].imag());
    vol.add(G.weights[i] * dens);
  }
  return cd(re.total(), im.total()) / vol.total();
}

}  // namespace

// d_l dbar_j theta must equal i * d_l(X^i g_{i jbar}) pointwise: this ties the
// chart components of the field, the potential of the field, and the metric
// jets together in one identity, checked in every chart of both projective
// models at generic points.
TEST_CASE("holomorphy potentials satisfy the contraction identity in every chart",
          "[futaki]") {
  for (int n : {1, 2}) {
    Manifold M = Manifold::make(n == 1 ? ManifoldKind::CP1 : ManifoldKind::CP2);
    auto X = HolomorphicField::projective_field(n, n == 1 ? generic2() : generic3());
    RadialPolynomial rad(n, {0.2, -0.1});
    AngularPotential ang(n, {{{1, 0}, {0, n == 1 ? 0 : 1}, 1, cd(0.12, -0.07)}});
    LinearCombination phi(n, {{1.0, &rad}, {1.0, &ang}});

    std::vector<ChartPoint> pts;
    if (n == 1) {
      pts.push_back({{cd(0.3, -0.4), 0.0}, 0});
      pts.push_back({{cd(1.1, 0.7), 0.0}, 0});
      pts.push_back({{cd(0.5, -0.2), 0.0}, 1});
      pts.push_back({{cd(-0.9, 0.35), 0.0}, 1});
    } else {
      pts.push_back({{cd(0.3, -0.4), cd(-0.2, 0.5)}, 0});
      pts.push_back({{cd(0.8, 0.1), cd(0.4, -0.6)}, 1});
      pts.push_back({{cd(-0.5, 0.3), cd(0.7, 0.2)}, 2});
    }

    double worst = 0.0;
    for (const auto& p : pts) {
      const Jet phij = phi.jet(p);
      const auto Xj = X.component_jets(p);
      Jet theta = X.base_theta_jet(p);
      for (int i = 0; i < n; ++i) theta += Xj[i] * phij.derivative(i) * cd(0.0, 1.0);
      const PotentialJets pj = extract_potential_jets(M.base_potential(p) + phij);
      const auto Xc = X.components(p);
      for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j) {
          const cd lhs = theta.partial(l == 0 ? 1 : 0, j == 0 ? 1 : 0,
                                       l == 1 ? 1 : 0, j == 1 ? 1 : 0);
          cd rhs = 0.0;
          for (int m = 0; m < n; ++m)
            rhs += Xj[m].derivative(l).value() * pj.g[m][j] + Xc[m] * pj.dg[l][m][j];
          rhs *= cd(0.0, 1.0);
          worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    INFO("n = " << n);
    REQUIRE(worst < 1e-12);
  }
}

// The Galerkin solve knows nothing about the closed form theta0 + i X(phi);
// recovering it (coefficients included) to round-off is an end-to-end check of
// the dbar right-hand side, the basis derivatives, and the normalization.
TEST_CASE("solved holomorphy potentials match the closed form on projective space",
          "[futaki]") {
  SECTION("one-dimensional model") {
    Manifold M = Manifold::make(ManifoldKind::CP1);
    QuadratureGrid G = build_grid(M, {16, 12});
    auto X = HolomorphicField::projective_field(1, generic2());
    RadialPolynomial rad(1, {0.2, -0.1});
    AngularPotential ang(1, {{{1, 0}, {0, 0}, 1, cd(0.1, 0.05)}});
    LinearCombination phi(1, {{1.0, &rad}, {1.0, &ang}});

    const ThetaSolveResult sol = solve_theta(M, G, X, &phi);
    REQUIRE(sol.residual < 1e-12);

    const std::vector<cd> closed = theta_values(M, G, X, &phi);
    const cd mean = volume_mean(M, G, &phi, closed);
    double sup = 0.0;
    for (std::size_t i = 0; i < G.size(); ++i)
      sup = std::max(sup, std::abs(sol.values[i] - (closed[i] - mean)));
    REQUIRE(sup < 1e-12);

    // coefficient recovery: the (0,1) matrix potential and the derived column
    REQUIRE(std::abs(sol.coeff[1] - generic2()[0][1]) < 1e-12);
    REQUIRE(std::abs(sol.coeff.back() - 1.0) < 1e-12);
  }

  SECTION("two-dimensional model") {
    Manifold M = Manifold::make(ManifoldKind::CP2);
    QuadratureGrid G = build_grid(M, {8, 6});
    auto X = HolomorphicField::projective_field(2, generic3());
    RadialPolynomial rad(2, {0.15, -0.05});
    AngularPotential ang(2, {{{1, 0}, {0, 1}, 1, cd(0.1, -0.06)}});
    LinearCombination phi(2, {{1.0, &rad}, {1.0, &ang}});

    const ThetaSolveResult sol = solve_theta(M, G, X, &phi);
    REQUIRE(sol.residual < 1e-12);

    const std::vector<cd> closed = theta_values(M, G, X, &phi);
    const cd mean = volume_mean(M, G, &phi, closed);
    double sup = 0.0;
    for (std::size_t i = 0; i < G.size(); ++i)
      sup = std::max(sup, std::abs(sol.values[i] - (closed[i] - mean)));
    REQUIRE(sup < 1e-12);

    REQUIRE(std::abs(sol.coeff[1 * 3 + 2] - generic3()[1][2]) < 1e-12);
    REQUIRE(std::abs(sol.coeff.back() - 1.0) < 1e-12);
  }
}

// On the torus a constant field b d/dz is not Hamiltonian: the dbar equation
// is solvable only after subtracting the harmonic obstruction alpha dzbar,
// and alpha = i b exactly.  For the flat metric the Fourier part vanishes
// identically; for a strongly perturbed metric the solve stays exact while
// the invariant vanishes at the quadrature-truncation level.
TEST_CASE("torus solve isolates the harmonic obstruction", "[futaki]") {
  Manifold M = Manifold::make(ManifoldKind::Torus);
  const cd b(0.7, -0.3);
  auto X = HolomorphicField::torus_constant(b);

  SECTION("flat metric") {
    QuadratureGrid G = build_grid(M, {16, 16});
    const ThetaSolveResult sol = solve_theta(M, G, X, nullptr);
    REQUIRE(sol.residual < 1e-12);
    REQUIRE(std::abs(sol.alpha - cd(0.0, 1.0) * b) < 1e-12);
    double sup = 0.0;
    for (const cd v : sol.values) sup = std::max(sup, std::abs(v));
    REQUIRE(sup < 1e-12);
  }

  SECTION("perturbed metric") {
    // The Fourier amplitudes look small, but d dbar scales them by
    // pi^2 (p^2 + q^2): the metric density ranges over about [0.11, 2.06],
    // so log det g has slow Fourier tails and the m = 32 trapezoid rule
    // carries ~1e-9 truncation (measured; m = 24 gives ~7e-7, m = 48 ~3e-13).
    QuadratureGrid G = build_grid(M, {32, 32});
    TorusFourier phi({{1, 0, 0.04, 0.0}, {0, 1, 0.0, 0.03}, {1, 1, 0.02, -0.01}});
    const ThetaSolveResult sol = solve_theta(M, G, X, &phi);
    REQUIRE(sol.residual < 1e-12);
    REQUIRE(std::abs(sol.alpha - cd(0.0, 1.0) * b) < 1e-12);

    const double mu = mu_k(M, G, 1, 1, &phi);
    REQUIRE(std::abs(mu) < 5e-8);
    const cd F = futaki_invariant(M, G, X, &phi, 1, mu, 1, &sol.values);
    REQUIRE(std::abs(F) < 5e-8);
  }

  SECTION("no global potential off the solve") {
    REQUIRE_THROWS_AS(X.base_theta(ChartPoint{{cd(0.1, 0.2), 0.0}, 0}), ConfigError);
  }
}

// The invariant is a character: on these models it vanishes for every field
// and every metric in the class.  Vanishing for perturbed metrics is the
// metric-independence statement with the reference value zero.
TEST_CASE("higher Futaki invariants vanish on the projective models", "[futaki]") {
  SECTION("one-dimensional model") {
    Manifold M = Manifold::make(ManifoldKind::CP1);
    QuadratureGrid G = build_grid(M, {24, 16});
    auto Xg = HolomorphicField::projective_field(1, generic2());
    auto Xd = HolomorphicField::diagonal(M, cd(1.0, 0.5));
    RadialPolynomial r1(1, {0.3, -0.2, 0.1});
    AngularPotential a1(1, {{{1, 0}, {0, 0}, 1, cd(0.15, 0.1)}});
    LinearCombination mix(1, {{1.0, &r1}, {0.8, &a1}});
    const ScalarField* phis[] = {nullptr, &r1, &a1, &mix};
    for (const ScalarField* phi : phis) {
      const double mu = mu_k(M, G, 1, 1, phi);
      REQUIRE(std::abs(futaki_invariant(M, G, Xg, phi, 1, mu, 1)) < 1e-12);
      REQUIRE(std::abs(futaki_invariant(M, G, Xd, phi, 1, mu, 1)) < 1e-12);
    }
  }

  SECTION("two-dimensional model, both degrees") {
    // Perturbed-metric integrands are no longer symmetric enough for the
    // product rule to be exact; measured truncation at this grid is ~3e-9.
    Manifold M = Manifold::make(ManifoldKind::CP2);
    QuadratureGrid G = build_grid(M, {14, 8});
    auto Xg = HolomorphicField::projective_field(2, generic3());
    auto Xd = HolomorphicField::diagonal(M, cd(0.8, -0.3), cd(-0.4, 0.6));
    RadialPolynomial r1(2, {0.2, -0.1});
    AngularPotential a1(2, {{{1, 0}, {0, 1}, 1, cd(0.12, 0.08)}});
    const ScalarField* phis[] = {nullptr, &r1, &a1};
    for (const ScalarField* phi : phis)
      for (int k : {1, 2}) {
        const double mu = mu_k(M, G, k, 1, phi);
        INFO("k = " << k);
        REQUIRE(std::abs(futaki_invariant(M, G, Xg, phi, k, mu, 1)) < 1e-6);
        REQUIRE(std::abs(futaki_invariant(M, G, Xd, phi, k, mu, 1)) < 1e-6);
      }
  }
}

// Independent polynomial route: for rotation-invariant metrics on the
// one-dimensional model everything reduces to exact polynomial calculus in
// u = |z|^2/(1+|z|^2), with no jets and a different integration variable.
// Agreement with the quadrature route is a two-sided oracle.
TEST_CASE("the radial reduction reproduces the quadrature invariant", "[futaki]") {
  Manifold M = Manifold::make(ManifoldKind::CP1);

  SECTION("reference metric closed forms") {
    const auto r = futaki_via_fk({}, cd(0.3, -0.7));
    REQUIRE(std::abs(r.invariant) < 1e-14);
    REQUIRE(std::abs(r.chern_pairing - cd(0.3, -0.7)) < 1e-14);
  }

  SECTION("inadmissible potentials are rejected") {
    REQUIRE_THROWS_AS(futaki_via_fk({-2.0}, cd(1.0, 0.0)), AdmissibilityError);
  }

  SECTION("diagonal fields on rotation-invariant metrics") {
    QuadratureGrid G = build_grid(M, {64, 8}, true);
    const std::vector<std::vector<double>> phis = {
        {0.3, -0.2, 0.1}, {-0.25, 0.12}, {0.15, 0.1, -0.05}};
    for (const auto& c : phis) {
      RadialPolynomial phi(1, c);
      const double mu = mu_k(M, G, 1, 1, &phi);
      for (const cd a : {cd(1.0, 0.0), cd(0.5, -0.8)}) {
        auto X = HolomorphicField::diagonal(M, a);
        const cd F1 = futaki_invariant(M, G, X, &phi, 1, mu, 1);
        const cd C1 = futaki_invariant(M, G, X, &phi, 1, 0.0, 1);
        const RadialFutakiResult r2 = futaki_via_fk(c, a);
        REQUIRE(std::abs(F1 - r2.invariant) < 1e-12);
        REQUIRE(std::abs(C1 - r2.chern_pairing) < 1e-12);
        REQUIRE(std::abs(C1) > 0.4 * std::abs(a));  // the pairing has teeth
      }
    }
  }

  SECTION("generic fields on the full grid") {
    // The full invariant is insensitive to the constant part of the
    // potential (the defect has zero mean), so it sees only the diagonal
    // part of the field on a rotation-invariant metric and both routes must
    // agree.  The mu = 0 pairing is NOT compared here: it shifts with the
    // constant normalization of theta, which differs between the routes for
    // fields with a trace or off-diagonal part.
    QuadratureGrid Gf = build_grid(M, {24, 16});
    RadialPolynomial phi(1, {0.3, -0.2, 0.1});
    const double mu = mu_k(M, Gf, 1, 1, &phi);
    const auto m = generic2();
    auto X = HolomorphicField::projective_field(1, m);
    const cd F1 = futaki_invariant(M, Gf, X, &phi, 1, mu, 1);
    const RadialFutakiResult r2 = futaki_via_fk({0.3, -0.2, 0.1}, m[1][1] - m[0][0]);
    REQUIRE(std::abs(F1 - r2.invariant) < 1e-12);
  }
}

// One-parameter automorphism flows: the pulled-back metrics stay in the
// class, so every K-energy is constant along the flow and its reported slope
// vanishes, while the mu = 0 pairing ties the same slope to the field with a
// nonzero, sign-sensitive value.
TEST_CASE("automorphism flows have constant energy and a nonzero pairing slope",
          "[futaki]") {
  SECTION("one-dimensional model") {
    Manifold M = Manifold::make(ManifoldKind::CP1);
    QuadratureGrid G = build_grid(M, {32, 16});
    FlowPath flow(M, {0.8, 0.0});
    auto X = flow.generator();

    REQUIRE(flow.sup_abs_potential(G, 1.0) > 0.5);  // a genuinely large path

    const double mu = mu_k(M, G, 1, 1);
    REQUIRE(std::abs(k_energy_path(M, G, flow, 1, mu, 16, 1)) < 1e-12);
    for (double tau : {0.0, 0.3, 0.7})
      REQUIRE(std::abs(k_energy_time_derivative(M, G, flow, 1, mu, tau, 1)) < 1e-12);

    // The path velocity is twice the imaginary part of the holomorphy
    // potential along the flow.
    double sup = 0.0;
    for (std::size_t i = 0; i < G.size(); ++i) {
      const PotentialJets vel = flow.velocity_jets(G, i, 0.0);
      sup = std::max(sup,
                     std::abs(vel.v.real() - 2.0 * X.base_theta(G.nodes[i]).imag()));
    }
    REQUIRE(sup < 1e-12);

    // Slope/pairing linkage at an interior time with mu = 0: the slope is
    // -2 Re of the plain pairing, and for this flow the pairing is exactly
    // the diagonal coefficient a = 0.8, so the slope is -1.6.
    FlowPotential fp(M, {0.8, 0.0}, 0.5);
    const double dMc = k_energy_time_derivative(M, G, flow, 1, 0.0, 0.5, 1);
    const cd Fc = futaki_invariant(M, G, X, &fp, 1, 0.0, 1);
    REQUIRE(std::abs(dMc + 2.0 * Fc.real()) < 1e-10);
    REQUIRE(dMc == Catch::Approx(-1.6).margin(1e-9));

    // The fixed-time snapshot and the path report the same total jets.
    BasePotentialField base(M);
    const auto& bj = base.jets_on(G);
    const auto& fpj = fp.jets_on(G);
    double supj = 0.0;
    for (std::size_t i : {std::size_t(3), std::size_t(100), std::size_t(400)}) {
      const PotentialJets a = flow.total_jets(G, i, 0.5);
      PotentialJets b = bj[i];
      b.axpy(1.0, fpj[i]);
      supj = std::max({supj, std::abs(a.v - b.v), std::abs(a.g[0][0] - b.g[0][0]),
                       std::abs(a.ddg[0][0][0][0] - b.ddg[0][0][0][0])});
    }
    REQUIRE(supj < 1e-12);
  }

  SECTION("two-dimensional model, both degrees") {
    Manifold M = Manifold::make(ManifoldKind::CP2);
    QuadratureGrid G = build_grid(M, {8, 6});
    FlowPath flow(M, {0.6, -0.4});
    auto X = flow.generator();

    for (int k : {1, 2}) {
      const double mu = mu_k(M, G, k, 1);
      INFO("k = " << k);
      REQUIRE(std::abs(k_energy_path(M, G, flow, k, mu, 12, 1)) < 1e-12);
      REQUIRE(std::abs(k_energy_time_derivative(M, G, flow, k, mu, 0.4, 1)) < 1e-12);
    }

    double sup = 0.0;
    for (std::size_t i = 0; i < G.size(); ++i) {
      const PotentialJets vel = flow.velocity_jets(G, i, 0.0);
      sup = std::max(sup,
                     std::abs(vel.v.real() - 2.0 * X.base_theta(G.nodes[i]).imag()));
    }
    REQUIRE(sup < 1e-12);

    // Degree-2 linkage; the limit value of the slope is -2(a1 + a2) = -0.4,
    // reached up to ~1.5e-4 quadrature truncation on this grid.
    FlowPotential fp(M, {0.6, -0.4}, 0.3);
    const double dMc = k_energy_time_derivative(M, G, flow, 2, 0.0, 0.3, 1);
    const cd Fc = futaki_invariant(M, G, X, &fp, 2, 0.0, 1);
    REQUIRE(std::abs(dMc + 2.0 * Fc.real()) < 1e-10);
    REQUIRE(dMc == Catch::Approx(-0.4).margin(5e-3));
  }

  SECTION("no automorphism flows on the torus") {
    Manifold M = Manifold::make(ManifoldKind::Torus);
    REQUIRE_THROWS_AS(FlowPath(M, {0.5, 0.0}), ConfigError);
  }
}
