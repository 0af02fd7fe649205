#pragma once

#include <algorithm>
#include <array>
#include <vector>

#include "kenergy/potentials.hpp"

namespace kenergy {

/// Closed-form cohomological reference data for one (manifold, degree) pair.
/// Every entry is an exact rational multiple of a power of pi, independent of
/// any quadrature in this library, so the table can arbitrate the numerical
/// routes rather than the other way round.
struct ReferenceValues {
  double volume = 0.0;         ///< int omega^n
  double euler = 0.0;          ///< int c_n (Euler characteristic)
  double chern_pairing = 0.0;  ///< int c_k ^ omega^{n-k}
  double mu = 0.0;             ///< chern_pairing / volume
  double lambda = 0.0;         ///< 2 pi mu_1 (bundle normalization constant)
};

/// Reference values from classical facts only: on CP^n the tangent bundle has
/// total Chern class (1 + h)^{n+1} with h the hyperplane class, int h^n = 1,
/// and the reference form represents [omega] = 2 pi h; the flat torus has
/// vanishing curvature, so every Chern integral is zero.
///   cp1:  V = 2 pi,    c_1 = 2h:  int c_1 = 2,                 mu_1 = 1/pi
///   cp2:  V = 4 pi^2,  c_1 = 3h:  int c_1 ^ omega = 6 pi,      mu_1 = 3/(2 pi)
///                      c_2 = 3h^2: int c_2 = 3 = chi,          mu_2 = 3/(4 pi^2)
///   torus: V = 2, everything curvature-built is 0.
inline ReferenceValues cohomology_reference(ManifoldKind kind, int k) {
  ReferenceValues r;
  switch (kind) {
    case ManifoldKind::CP1: {
      if (k != 1) throw ConfigError("cohomology_reference: cp1 has degrees k = 1 only");
      r.volume = 2.0 * M_PI;
      r.euler = 2.0;
      r.chern_pairing = 2.0;
      break;
    }
    case ManifoldKind::CP2: {
      if (k != 1 && k != 2) throw ConfigError("cohomology_reference: cp2 has degrees k = 1, 2");
      r.volume = 4.0 * M_PI * M_PI;
      r.euler = 3.0;
      // (1+h)^3 = 1 + 3h + 3h^2: int 3h ^ (2 pi h) = 6 pi, int 3h^2 = 3.
      r.chern_pairing = (k == 1) ? 6.0 * M_PI : 3.0;
      break;
    }
    case ManifoldKind::Torus: {
      if (k != 1) throw ConfigError("cohomology_reference: torus has degrees k = 1 only");
      r.volume = 2.0;
      r.euler = 0.0;
      r.chern_pairing = 0.0;
      break;
    }
  }
  r.mu = r.chern_pairing / r.volume;
  // lambda pairs c_1 regardless of the requested degree.
  const double c1_pairing = (kind == ManifoldKind::CP1)   ? 2.0
                            : (kind == ManifoldKind::CP2) ? 6.0 * M_PI
                                                          : 0.0;
  r.lambda = 2.0 * M_PI * c1_pairing / r.volume;
  return r;
}

/// All Wirtinger multi-indices (a1, b1, a2, b2) with total order <= 4 that
/// are meaningful in complex dimension n (a2 = b2 = 0 when n = 1), in a fixed
/// deterministic order. Shared by the finite-difference table and the tests
/// that sweep it.
inline const std::vector<std::array<int, 4>>& partial_indices(int n) {
  static const auto build = [](int dim) {
    std::vector<std::array<int, 4>> v;
    const int cap = 4;
    for (int a1 = 0; a1 <= cap; ++a1)
      for (int b1 = 0; a1 + b1 <= cap; ++b1)
        for (int a2 = 0; a2 <= (dim == 1 ? 0 : cap - a1 - b1); ++a2)
          for (int b2 = 0; b2 <= (dim == 1 ? 0 : cap - a1 - b1 - a2); ++b2)
            v.push_back({a1, b1, a2, b2});
    return v;
  };
  static const std::vector<std::array<int, 4>> v1 = build(1);
  static const std::vector<std::array<int, 4>> v2 = build(2);
  return n == 1 ? v1 : v2;
}

/// Wirtinger partial table up to total order 4, estimated from point values
/// only. Mirrors Jet::partial so analytic jets can be swept against it.
struct FdJet {
  int n = 1;
  std::array<cd, 625> table{};  // base-5 positional index (a1, b1, a2, b2)

  static int index(int a1, int b1, int a2, int b2) {
    return ((a1 * 5 + b1) * 5 + a2) * 5 + b2;
  }
  cd partial(int a1, int b1, int a2 = 0, int b2 = 0) const {
    return table[index(a1, b1, a2, b2)];
  }
};

namespace detail {

/// Finite-difference weights on arbitrary nodes by the Fornberg recursion
/// (weights of nodes alpha[0..N] for derivative orders 0..M at x0). Exact in
/// rational arithmetic; here M = 4, N = 4.
inline std::array<std::array<double, 5>, 5> fd_weights(const std::array<double, 5>& alpha,
                                                       double x0) {
  constexpr int N = 4, M = 4;
  // d[nn][v][m]: weight of node v for order m using nodes 0..nn.
  double d[N + 1][N + 1][M + 1] = {};
  d[0][0][0] = 1.0;
  double c1 = 1.0;
  for (int nn = 1; nn <= N; ++nn) {
    double c2 = 1.0;
    const double c4 = alpha[nn] - x0;
    for (int v = 0; v < nn; ++v) {
      const double c3 = alpha[nn] - alpha[v];
      c2 *= c3;
      for (int m = 0; m <= std::min(nn, M); ++m)
        d[nn][v][m] = (c4 * d[nn - 1][v][m] - (m ? m * d[nn - 1][v][m - 1] : 0.0)) / c3;
    }
    const double c5 = alpha[nn - 1] - x0;
    for (int m = 0; m <= std::min(nn, M); ++m)
      d[nn][nn][m] =
          (c1 / c2) * ((m ? m * d[nn - 1][nn - 1][m - 1] : 0.0) - c5 * d[nn - 1][nn - 1][m]);
    c1 = c2;
  }
  std::array<std::array<double, 5>, 5> w{};
  for (int m = 0; m <= M; ++m)
    for (int v = 0; v <= N; ++v) w[m][v] = d[N][v][m];
  return w;
}

/// Real mixed partials (total order <= 4) over the 2n real chart coordinates
/// at one step size: a full 5^{2n} value lattice is evaluated once and reused
/// for every derivative index (the value-lattice cache), then contracted with
/// tensored central-difference weights.
struct RealPartials {
  int axes = 2;           // 2n
  std::vector<double> d;  // indexed by base-5 multi-index over axes
};

/// i^k for any integer k (exact unit values, no transcendental round-off).
inline cd unit_power(int k) {
  static const cd tab[4] = {cd(1.0, 0.0), cd(0.0, 1.0), cd(-1.0, 0.0), cd(0.0, -1.0)};
  return tab[((k % 4) + 4) % 4];
}

inline RealPartials real_partials(const ScalarField& f, const ChartPoint& p, int n, double h) {
  const int axes = 2 * n;
  const int lattice = axes == 2 ? 25 : 625;
  std::vector<double> value(lattice);
  for (int u = 0; u < lattice; ++u) {
    int rem = u;
    ChartPoint q = p;
    for (int a = 0; a < axes; ++a) {
      const int k = rem % 5 - 2;
      rem /= 5;
      q.z[a / 2] += (a % 2 == 0) ? cd(k * h, 0.0) : cd(0.0, k * h);
    }
    value[u] = f.value(q);
  }

  const std::array<double, 5> nodes = {-2.0 * h, -1.0 * h, 0.0, 1.0 * h, 2.0 * h};
  const auto w = fd_weights(nodes, 0.0);
  // nodes above are ordered by value; the lattice index k runs -2..2 in order,
  // but fd_weights consumed them in the listed order {-2h,-h,0,h,2h} == k+2.

  RealPartials out;
  out.axes = axes;
  const int combos = axes == 2 ? 25 : 625;
  out.d.assign(combos, 0.0);
  for (int c = 0; c < combos; ++c) {
    int rem = c, m[4] = {0, 0, 0, 0}, total = 0;
    for (int a = 0; a < axes; ++a) {
      m[a] = rem % 5;
      rem /= 5;
      total += m[a];
    }
    if (total > 4) continue;
    double acc = 0.0;
    for (int u = 0; u < lattice; ++u) {
      int ur = u;
      double wt = 1.0;
      for (int a = 0; a < axes; ++a) {
        wt *= w[m[a]][ur % 5];
        ur /= 5;
      }
      if (wt != 0.0) acc += wt * value[u];
    }
    out.d[c] = acc;
  }
  return out;
}

inline double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace detail

/// Central-difference estimate of every Wirtinger partial (total order <= 4)
/// of a real scalar field at a chart point, probing only point values in the
/// point's own chart. Three step sizes h, h/2, h/4 feed a Richardson tableau
/// for the even error series of symmetric stencils; the last two diagonal
/// entries must agree or the step is declared unstable (too large: the
/// expansion is outside its asymptotic range; too small: cancellation noise
/// dominates — both surface as tableau disagreement). For unit-scale fields
/// the stable range is roughly h in [5e-3, 0.1], best near the default.
///   d_z  = (d_x - i d_y)/2,  d_zbar = (d_x + i d_y)/2,
/// expanded binomially per coordinate over the real partial tensor.
inline FdJet finite_difference_jets(const ScalarField& f, const ChartPoint& p, int n,
                                    double h = 0.04) {
  if (!(h > 0.0)) throw ConfigError("finite_difference_jets: step must be positive");
  constexpr int kLevels = 3;
  std::array<detail::RealPartials, kLevels> lv;
  for (int l = 0; l < kLevels; ++l)
    lv[l] = detail::real_partials(f, p, n, h / double(1 << l));

  const int axes = 2 * n;
  const int combos = axes == 2 ? 25 : 625;
  std::vector<double> extrap(combos, 0.0);
  double worst_disagreement = 0.0;
  for (int c = 0; c < combos; ++c) {
    int rem = c, total = 0;
    for (int a = 0; a < axes; ++a) {
      total += rem % 5;
      rem /= 5;
    }
    if (total > 4) continue;
    // Richardson tableau in h^2: T[i][j] has error O(h^{2(j+1)}).
    double T[kLevels][kLevels];
    for (int i = 0; i < kLevels; ++i) T[i][0] = lv[i].d[c];
    for (int j = 1; j < kLevels; ++j) {
      const double fac = double(1 << (2 * j));  // 4^j
      for (int i = j; i < kLevels; ++i)
        T[i][j] = T[i][j - 1] + (T[i][j - 1] - T[i - 1][j - 1]) / (fac - 1.0);
    }
    extrap[c] = T[kLevels - 1][kLevels - 1];
    const double dis = std::abs(T[kLevels - 1][kLevels - 1] - T[kLevels - 2][kLevels - 2]) /
                       std::max(1.0, std::abs(extrap[c]));
    worst_disagreement = std::max(worst_disagreement, dis);
  }
  if (worst_disagreement > 1e-3)
    throw NumericsError("finite_difference_jets: step h outside the stable range "
                        "(Richardson levels disagree)");

  FdJet out;
  out.n = n;
  for (const auto& idx : partial_indices(n)) {
    const int a1 = idx[0], b1 = idx[1], a2 = idx[2], b2 = idx[3];
    cd acc = 0.0;
    for (int r1 = 0; r1 <= a1; ++r1)
      for (int s1 = 0; s1 <= b1; ++s1)
        for (int r2 = 0; r2 <= a2; ++r2)
          for (int s2 = 0; s2 <= b2; ++s2) {
            // (-i)^(a-r) from d_z factors, (+i)^(b-s) from d_zbar factors:
            // together i^{(b-s) - (a-r)}.
            const cd phase =
                detail::unit_power((b1 - s1 + b2 - s2) - (a1 - r1 + a2 - r2));
            const double coef = detail::binom(a1, r1) * detail::binom(b1, s1) *
                                detail::binom(a2, r2) * detail::binom(b2, s2);
            int m[4] = {r1 + s1, a1 + b1 - r1 - s1, r2 + s2, a2 + b2 - r2 - s2};
            int flat = 0;
            for (int a = axes - 1; a >= 0; --a) flat = flat * 5 + m[a];
            acc += phase * coef * extrap[flat];
          }
    out.table[FdJet::index(a1, b1, a2, b2)] =
        acc * std::pow(0.5, a1 + b1 + a2 + b2);
  }
  return out;
}

}  // namespace kenergy
