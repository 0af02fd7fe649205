#pragma once

#include <array>
#include <bit>

#include "kenergy/grid.hpp"
#include "kenergy/metric.hpp"

namespace kenergy {

/// Pointwise value of a complex differential form in the chart, stored on the
/// basis dz^I wedge dzbar^J with I, J ascending index sets encoded as bit
/// masks (n <= 2, so masks run over 0..3). Terms of different bidegree may
/// coexist; the wedge applies the Koszul sign per term from the popcounts.
struct FormValue {
  int n = 1;
  std::array<cd, 16> c{};  // c[maskI * 4 + maskJ]

  static FormValue scalar(int n, cd v) {
    FormValue f;
    f.n = n;
    f.c[0] = v;
    return f;
  }

  cd& at(int maskI, int maskJ) { return c[maskI * 4 + maskJ]; }
  cd at(int maskI, int maskJ) const { return c[maskI * 4 + maskJ]; }

  FormValue& operator+=(const FormValue& o) {
    for (int i = 0; i < 16; ++i) c[i] += o.c[i];
    return *this;
  }
  FormValue& operator-=(const FormValue& o) {
    for (int i = 0; i < 16; ++i) c[i] -= o.c[i];
    return *this;
  }
  FormValue& operator*=(cd s) {
    for (auto& x : c) x *= s;
    return *this;
  }
  friend FormValue operator+(FormValue a, const FormValue& b) { return a += b; }
  friend FormValue operator-(FormValue a, const FormValue& b) { return a -= b; }
  friend FormValue operator*(FormValue a, cd s) { return a *= s; }
  friend FormValue operator*(cd s, FormValue a) { return a *= s; }
};

namespace detail {
/// Sign of merging two disjoint ascending index sets (count of inversions).
inline int merge_sign(unsigned a, unsigned b) {
  int inv = 0;
  while (b) {
    const int bit = std::countr_zero(b);
    inv += std::popcount(a >> (bit + 1));
    b &= b - 1;
  }
  return (inv & 1) ? -1 : 1;
}
}  // namespace detail

inline FormValue wedge(const FormValue& a, const FormValue& b) {
  FormValue r;
  r.n = a.n;
  const int nmask = 1 << a.n;
  for (int ia = 0; ia < nmask; ++ia)
    for (int ja = 0; ja < nmask; ++ja) {
      const cd ca = a.at(ia, ja);
      if (ca == 0.0) continue;
      const int qa = std::popcount(static_cast<unsigned>(ja));
      for (int ib = 0; ib < nmask; ++ib) {
        if (ia & ib) continue;
        for (int jb = 0; jb < nmask; ++jb) {
          if (ja & jb) continue;
          const cd cb = b.at(ib, jb);
          if (cb == 0.0) continue;
          const int pb = std::popcount(static_cast<unsigned>(ib));
          int sign = detail::merge_sign(ia, ib) * detail::merge_sign(ja, jb);
          if ((qa * pb) & 1) sign = -sign;
          r.at(ia | ib, ja | jb) += double(sign) * ca * cb;
        }
      }
    }
  return r;
}

inline FormValue wedge_pow(const FormValue& a, int k) {
  FormValue r = FormValue::scalar(a.n, 1.0);
  for (int i = 0; i < k; ++i) r = wedge(r, a);
  return r;
}

/// sum_{i=0}^{m} A^i wedge B^{m-i} (the mixed-power sums in the no-path
/// energy formulas).
inline FormValue sum_mixed_powers(const FormValue& A, const FormValue& B, int m) {
  FormValue total = FormValue::scalar(A.n, 0.0);
  for (int i = 0; i <= m; ++i) total += wedge(wedge_pow(A, i), wedge_pow(B, m - i));
  return total;
}

/// Kaehler form of a metric point: omega = i g_{i jbar} dz^i wedge dzbar^j.
inline FormValue omega_form(const MetricPoint& m) {
  FormValue f;
  f.n = m.n;
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) f.at(1 << i, 1 << j) = cd(0.0, 1.0) * m.g[i][j];
  return f;
}

/// The (1,1) form sum d_i dbar_j phi dz^i wedge dzbar^j from a potential jet
/// (multiply by i to get i ddbar phi).
inline FormValue hessian_form(const PotentialJets& pj, int n) {
  FormValue f;
  f.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) f.at(1 << i, 1 << j) = pj.g[i][j];
  return f;
}

/// Convert a top-degree (n,n) form value to a density against Lebesgue
/// measure on the chart: dz^1 dzbar^1 = -2i dV (n=1) and
/// dz^{12} dzbar^{12} = +4 dV (n=2).
inline double top_density(const FormValue& f) {
  if (f.n == 1) return (f.at(1, 1) * cd(0.0, -2.0)).real();
  return (f.at(3, 3) * 4.0).real();
}

/// Integrate a pointwise field of top forms over the grid.
inline double integrate_top(const QuadratureGrid& G, int threads,
                            const std::function<FormValue(std::size_t)>& field) {
  return integrate_density(G, threads, [&](std::size_t i) { return top_density(field(i)); });
}

}  // namespace kenergy
