#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "kenergy/jets.hpp"
#include "kenergy/manifold.hpp"
#include "kenergy/potentials.hpp"

using namespace kenergy;

TEST_CASE("jet arithmetic on coordinate functions", "[jets]") {
  const cd z0(0.3, -0.4);
  Jet z = Jet::variable(1, 0, z0);
  Jet zb = Jet::conj_variable(1, 0, z0);

  SECTION("product rule for |z|^4") {
    Jet f = (z * zb) * (z * zb);
    // f = z^2 zb^2: d_z d_zb f = 4 z zb, d_z^2 d_zb^2 f = 4
    REQUIRE(std::abs(f.value() - std::pow(std::abs(z0), 4.0)) < 1e-15);
    REQUIRE(std::abs(f.partial(1, 1) - 4.0 * z0 * std::conj(z0)) < 1e-14);
    REQUIRE(std::abs(f.partial(2, 2) - cd(4.0)) < 1e-14);
    REQUIRE(std::abs(f.partial(2, 1) - 4.0 * std::conj(z0)) < 1e-14);
  }

  SECTION("log jet matches closed-form derivatives of log(1+|z|^2)") {
    Jet f = (z * zb + 1.0).log();
    const double s = std::norm(z0);
    REQUIRE(std::abs(f.value() - std::log1p(s)) < 1e-15);
    // d_z log(1+z zb) = zb/(1+s); d_z d_zb = 1/(1+s)^2
    REQUIRE(std::abs(f.partial(1, 0) - std::conj(z0) / (1.0 + s)) < 1e-15);
    REQUIRE(std::abs(f.partial(1, 1) - cd(1.0 / ((1.0 + s) * (1.0 + s)))) < 1e-15);
    // d_z^2 d_zb^2 log(1+|z|^2) = 2(2s - 1)/(1+s)^4  [direct differentiation]
    const double expect = (4.0 * s - 2.0) / std::pow(1.0 + s, 4.0);
    REQUIRE(std::abs(f.partial(2, 2) - cd(expect)) < 1e-14);
  }

  SECTION("exp/log round trip") {
    Jet f = (z * zb + 0.7).log().exp() - (z * zb + 0.7);
    for (int a = 0; a <= 2; ++a)
      for (int b = 0; b <= 2; ++b) REQUIRE(std::abs(f.partial(a, b)) < 1e-14);
  }

  SECTION("inverse: f * inv(f) == 1") {
    Jet f = z * zb + z * 0.2 + zb * 0.2 + 1.5;
    Jet one = f * f.inv();
    REQUIRE(std::abs(one.value() - cd(1.0)) < 1e-14);
    for (int a = 0; a <= 2; ++a)
      for (int b = 0; b <= 2; ++b)
        if (a + b > 0) REQUIRE(std::abs(one.partial(a, b)) < 1e-13);
  }
}

TEST_CASE("two-dimensional jets", "[jets]") {
  const cd z1(0.25, 0.1), z2(-0.3, 0.2);
  ChartPoint p;
  p.z[0] = z1;
  p.z[1] = z2;
  Manifold cp2 = Manifold::make(ManifoldKind::CP2);
  Jet K = cp2.base_potential(p);
  const double s = std::norm(z1) + std::norm(z2);

  SECTION("Fubini–Study metric entries from the potential jet") {
    // g_{i jbar} = delta_ij/(1+s) - conj(z_i) z_j / (1+s)^2
    const double c1 = 1.0 / (1.0 + s), c2 = c1 * c1;
    REQUIRE(std::abs(K.partial(1, 1, 0, 0) - cd(c1 - std::norm(z1) * c2)) < 1e-14);
    REQUIRE(std::abs(K.partial(1, 0, 0, 1) - (-std::conj(z1) * z2 * c2)) < 1e-14);
    REQUIRE(std::abs(K.partial(0, 0, 1, 1) - cd(c1 - std::norm(z2) * c2)) < 1e-14);
  }

  SECTION("conjugation symmetry of a real potential") {
    Jet Kc = K.conj();
    for (int a1 = 0; a1 <= 2; ++a1)
      for (int b1 = 0; b1 <= 2; ++b1)
        for (int a2 = 0; a2 <= 1; ++a2)
          for (int b2 = 0; b2 <= 1; ++b2) {
            if (a1 + b1 + a2 + b2 > 4) continue;
            REQUIRE(std::abs(K.partial(a1, b1, a2, b2) - Kc.partial(a1, b1, a2, b2)) < 1e-14);
          }
  }
}

TEST_CASE("extracted potential jets are linear in the field", "[jets]") {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  RadialPolynomial f1(2, {0.3, -0.1});
  AngularPotential f2(2, {{{1, 0}, {0, 1}, 1, cd(0.4, 0.2)}});
  for (int trial = 0; trial < 5; ++trial) {
    ChartPoint p;
    p.z[0] = cd(U(rng), U(rng));
    p.z[1] = cd(U(rng), U(rng));
    const double a = U(rng), b = U(rng);
    LinearCombination combo(2, {{a, &f1}, {b, &f2}});
    PotentialJets direct = extract_potential_jets(combo.jet(p));
    PotentialJets manual = extract_potential_jets(f1.jet(p));
    PotentialJets other = extract_potential_jets(f2.jet(p));
    PotentialJets sum;
    sum.axpy(a, manual);
    sum.axpy(b, other);
    REQUIRE(std::abs(direct.v - sum.v) < 1e-14);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        REQUIRE(std::abs(direct.g[i][j] - sum.g[i][j]) < 1e-14);
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l)
            REQUIRE(std::abs(direct.ddg[k][l][i][j] - sum.ddg[k][l][i][j]) < 1e-13);
      }
  }
}

TEST_CASE("torus Fourier jets", "[jets]") {
  TorusFourier f({{2, 1, 0.7, -0.3}});
  ChartPoint p;
  p.z[0] = cd(0.37, 0.61);
  Jet j = f.jet(p);
  const double ang = 2.0 * M_PI * (2 * 0.37 + 1 * 0.61);
  REQUIRE(std::abs(j.value().real() - (0.7 * std::cos(ang) - 0.3 * std::sin(ang))) < 1e-13);
  REQUIRE(std::abs(j.value().imag()) < 1e-13);
  // d_z dbar_z of cos(2 pi (p x + q y)) = -(pi^2)(p^2+q^2) cos(...)  [since
  // d_z = (d_x - i d_y)/2 and the phase is linear]
  const double lap = -M_PI * M_PI * (4.0 + 1.0);
  REQUIRE(std::abs(j.partial(1, 1) - cd(lap * (0.7 * std::cos(ang) - 0.3 * std::sin(ang)))) <
          1e-12);
}
