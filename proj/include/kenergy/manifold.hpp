#pragma once

#include <string>

#include "kenergy/jets.hpp"
#include "kenergy/util.hpp"

namespace kenergy {

/// A point on the manifold, given in one of the standard charts (z[1] unused
/// when n = 1).
///
/// chart 0 is the default affine chart. The projective models also use the
/// antipodal charts so that quadrature nodes near the hyperplane at infinity
/// are evaluated with bounded coordinates (evaluating 4-jets of log-type
/// potentials at |z|^2 >> 1 in a single chart loses digits to cancellation,
/// and the loss grows with the radial resolution):
///   cp1 : chart 1 has coordinate w = 1/z;
///   cp2 : chart c in {1, 2} has coordinates (1/z_c, z_o/z_c), o the other
///         index (homogeneously: divide by Z_c instead of Z_0).
/// The reference potential log(1 + |coords|^2) is Fubini-Study in every chart
/// (chart potentials differ by pluriharmonic terms, which no metric-level
/// quantity sees), and the admissible potential families evaluate themselves
/// chart-covariantly, so grids can keep every coordinate modulus <= sqrt(2).
struct ChartPoint {
  cd z[2]{};
  int chart = 0;
};

enum class ManifoldKind { CP1, CP2, Torus };

inline std::string to_string(ManifoldKind k) {
  switch (k) {
    case ManifoldKind::CP1:
      return "cp1";
    case ManifoldKind::CP2:
      return "cp2";
    case ManifoldKind::Torus:
      return "torus";
  }
  return "?";
}

inline ManifoldKind manifold_from_string(const std::string& s) {
  if (s == "cp1" || s == "CP1") return ManifoldKind::CP1;
  if (s == "cp2" || s == "CP2") return ManifoldKind::CP2;
  if (s == "torus" || s == "t2" || s == "T2") return ManifoldKind::Torus;
  throw ConfigError("unknown manifold '" + s + "' (expected cp1, cp2, torus)");
}

/// Model compact Kaehler manifold, described in a single affine chart:
///   cp1, cp2 : affine chart of projective space, Fubini–Study reference
///              potential log(1 + |z|^2), volumes 2*pi and 4*pi^2;
///   torus    : C / (Z + Zi), fundamental square [0,1)^2, flat reference
///              potential |z|^2, volume \int omega = 2.
struct Manifold {
  ManifoldKind kind;
  int n;              // complex dimension
  double volume;      // \int_M omega^n (analytic value)
  double euler;       // Euler characteristic
  bool projective;    // true for cp1/cp2 (no harmonic (0,1) part in the chart)

  static Manifold make(ManifoldKind k) {
    switch (k) {
      case ManifoldKind::CP1:
        return {k, 1, 2.0 * M_PI, 2.0, true};
      case ManifoldKind::CP2:
        return {k, 2, 4.0 * M_PI * M_PI, 3.0, true};
      case ManifoldKind::Torus:
        return {k, 1, 2.0, 0.0, false};
    }
    throw Error("unreachable");
  }

  /// Jet of the reference Kaehler potential at a chart point. For the
  /// projective models the same expression log(1 + |coords|^2) is the right
  /// potential in every chart.
  Jet base_potential(const ChartPoint& p) const {
    if (projective) {
      Jet s = Jet::constant(n, 1.0);
      for (int i = 0; i < n; ++i)
        s += Jet::variable(n, i, p.z[i]) * Jet::conj_variable(n, i, p.z[i]);
      return s.log();
    }
    if (p.chart != 0) throw Error("torus points live in chart 0 only");
    return Jet::variable(n, 0, p.z[0]) * Jet::conj_variable(n, 0, p.z[0]);
  }
};

/// The globally smooth function u = |z|^2 / (1 + |z|^2) on cp^n (chart-0
/// expression; homogeneously u = (|Z|^2 - |Z_0|^2) / |Z|^2), evaluated at a
/// point in any chart. The radial potential families are polynomials in u.
inline double global_u(int n, const ChartPoint& p) {
  double s1 = 1.0;  // 1 + sum of squared chart-coordinate moduli
  for (int i = 0; i < n; ++i) s1 += std::norm(p.z[i]);
  if (p.chart == 0) return (s1 - 1.0) / s1;
  if (n == 1) return 1.0 / s1;
  return (1.0 + std::norm(p.z[1])) / s1;
}

/// 4-jet of global_u at a point in any chart.
inline Jet global_u_jet(int n, const ChartPoint& p) {
  Jet s1 = Jet::constant(n, 1.0);
  for (int i = 0; i < n; ++i)
    s1 += Jet::variable(n, i, p.z[i]) * Jet::conj_variable(n, i, p.z[i]);
  const Jet inv = s1.inv();
  if (p.chart == 0) return (s1 - 1.0) * inv;
  if (n == 1) return inv;
  return (Jet::constant(n, 1.0) +
          Jet::variable(n, 1, p.z[1]) * Jet::conj_variable(n, 1, p.z[1])) *
         inv;
}

}  // namespace kenergy
