#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "kenergy/util.hpp"

namespace kenergy {

using cd = std::complex<double>;

namespace detail {

/// Monomial bookkeeping for truncated polynomials in `vars` variables
/// (vars = 2n: the holomorphic coordinates followed by their conjugates),
/// total degree <= 4. Built once per dimension.
struct JetTables {
  static constexpr int kMaxDeg = 4;
  int vars = 0;
  int count = 0;                                  // number of monomials
  std::vector<std::array<std::uint8_t, 4>> expo;  // exponent tuples, padded with 0
  std::vector<int> degree;
  std::vector<int> hash_to_index;  // base-5 positional hash -> monomial index
  std::vector<int> prod;           // prod[i*count+j]: index of expo_i+expo_j, or -1
  std::vector<int> conj_perm;      // index after swapping z- and zbar-exponents
  std::vector<double> fact;        // prod of factorials of the exponents

  explicit JetTables(int nvars) : vars(nvars) {
    std::array<std::uint8_t, 4> e{0, 0, 0, 0};
    enumerate(e, 0, 0);
    count = static_cast<int>(expo.size());
    hash_to_index.assign(hash_size(), -1);
    for (int i = 0; i < count; ++i) hash_to_index[hash(expo[i])] = i;
    prod.assign(static_cast<std::size_t>(count) * count, -1);
    for (int i = 0; i < count; ++i)
      for (int j = 0; j < count; ++j) {
        if (degree[i] + degree[j] > kMaxDeg) continue;
        std::array<std::uint8_t, 4> s{};
        for (int v = 0; v < vars; ++v) s[v] = static_cast<std::uint8_t>(expo[i][v] + expo[j][v]);
        prod[static_cast<std::size_t>(i) * count + j] = hash_to_index[hash(s)];
      }
    conj_perm.assign(count, 0);
    const int n = vars / 2;
    for (int i = 0; i < count; ++i) {
      std::array<std::uint8_t, 4> s{};
      for (int v = 0; v < n; ++v) {
        s[v] = expo[i][n + v];
        s[n + v] = expo[i][v];
      }
      conj_perm[i] = hash_to_index[hash(s)];
    }
    fact.assign(count, 1.0);
    for (int i = 0; i < count; ++i) {
      double f = 1.0;
      for (int v = 0; v < vars; ++v)
        for (int m = 2; m <= expo[i][v]; ++m) f *= m;
      fact[i] = f;
    }
  }

  int index_of(const std::array<std::uint8_t, 4>& e) const { return hash_to_index[hash(e)]; }

 private:
  std::size_t hash_size() const {
    std::size_t s = 1;
    for (int v = 0; v < vars; ++v) s *= kMaxDeg + 1;
    return s;
  }
  std::size_t hash(const std::array<std::uint8_t, 4>& e) const {
    std::size_t h = 0;
    for (int v = vars - 1; v >= 0; --v) h = h * (kMaxDeg + 1) + e[v];
    return h;
  }
  void enumerate(std::array<std::uint8_t, 4>& e, int v, int used) {
    if (v == vars) {
      expo.push_back(e);
      degree.push_back(used);
      return;
    }
    for (int d = 0; d + used <= kMaxDeg; ++d) {
      e[v] = static_cast<std::uint8_t>(d);
      enumerate(e, v + 1, used + d);
    }
    e[v] = 0;
  }
};

inline const JetTables& jet_tables(int vars) {
  static const JetTables t2(2), t4(4);
  switch (vars) {
    case 2:
      return t2;
    case 4:
      return t4;
    default:
      throw Error("jet_tables: only 1 or 2 complex dimensions are supported");
  }
}

}  // namespace detail

/// Truncated Taylor expansion (total degree <= 4) of a real-analytic function
/// of (z_1..z_n, conj z_1..conj z_n), centered at a chart point. Arithmetic on
/// jets propagates all mixed Wirtinger derivatives up to fourth order exactly,
/// which is what the curvature formulas consume.
class Jet {
 public:
  Jet() : Jet(1) {}
  explicit Jet(int n) : n_(n), tab_(&detail::jet_tables(2 * n)), c_(tab_->count, cd(0.0)) {}

  static Jet constant(int n, cd v) {
    Jet j(n);
    j.c_[0] = v;
    return j;
  }
  /// The coordinate function z_i seeded at value, as a jet.
  static Jet variable(int n, int i, cd value) {
    Jet j(n);
    j.c_[0] = value;
    std::array<std::uint8_t, 4> e{0, 0, 0, 0};
    e[i] = 1;
    j.c_[j.tab_->index_of(e)] = 1.0;
    return j;
  }
  /// The conjugate coordinate function conj(z_i) seeded at value.
  static Jet conj_variable(int n, int i, cd z_value) {
    Jet j(n);
    j.c_[0] = std::conj(z_value);
    std::array<std::uint8_t, 4> e{0, 0, 0, 0};
    e[n + i] = 1;
    j.c_[j.tab_->index_of(e)] = 1.0;
    return j;
  }

  int dim() const { return n_; }
  cd value() const { return c_[0]; }

  Jet& operator+=(const Jet& o) {
    for (int i = 0; i < tab_->count; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int i = 0; i < tab_->count; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator*=(cd s) {
    for (auto& x : c_) x *= s;
    return *this;
  }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, cd s) { return a *= s; }
  friend Jet operator*(cd s, Jet a) { return a *= s; }
  friend Jet operator+(Jet a, cd s) {
    a.c_[0] += s;
    return a;
  }
  friend Jet operator-(Jet a, cd s) {
    a.c_[0] -= s;
    return a;
  }
  friend Jet operator-(Jet a) { return a *= -1.0; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.n_);
    const auto& tab = *a.tab_;
    const int count = tab.count;
    for (int i = 0; i < count; ++i) {
      if (a.c_[i] == 0.0) continue;
      const int* row = tab.prod.data() + static_cast<std::size_t>(i) * count;
      const cd ai = a.c_[i];
      for (int j = 0; j < count; ++j) {
        const int k = row[j];
        if (k >= 0) r.c_[k] += ai * b.c_[j];
      }
    }
    return r;
  }

  /// Complex conjugate: swaps z- and zbar-exponents and conjugates
  /// coefficients (valid because conj o d^a dbar^b = d^b dbar^a o conj).
  Jet conj() const {
    Jet r(n_);
    for (int i = 0; i < tab_->count; ++i) r.c_[tab_->conj_perm[i]] = std::conj(c_[i]);
    return r;
  }

  /// Compose with an analytic scalar function given its Taylor coefficients
  /// d[k] = f^(k)(value())/k!, k = 0..4 (Horner in the nilpotent part).
  Jet compose(const std::array<cd, 5>& d) const {
    Jet v = *this;
    v.c_[0] = 0.0;
    Jet r = Jet::constant(n_, d[4]);
    for (int k = 3; k >= 0; --k) {
      r = r * v;
      r.c_[0] += d[k];
    }
    return r;
  }

  Jet inv() const {
    const cd u = c_[0];
    if (u == 0.0) throw NumericsError("jet inverse at zero");
    const cd iu = 1.0 / u;
    return compose({iu, -iu * iu, iu * iu * iu, -iu * iu * iu * iu, iu * iu * iu * iu * iu});
  }
  Jet log() const {
    const cd u = c_[0];
    if (u == 0.0) throw NumericsError("jet log at zero");
    const cd iu = 1.0 / u;
    return compose({std::log(u), iu, -0.5 * iu * iu, (1.0 / 3.0) * iu * iu * iu,
                    -0.25 * iu * iu * iu * iu});
  }
  Jet exp() const {
    const cd e = std::exp(c_[0]);
    return compose({e, e, e / 2.0, e / 6.0, e / 24.0});
  }
  Jet pow(int k) const {
    Jet r = Jet::constant(n_, 1.0);
    Jet base = *this;
    int e = k;
    if (e < 0) {
      base = base.inv();
      e = -e;
    }
    while (e > 0) {
      if (e & 1) r = r * base;
      base = base * base;
      e >>= 1;
    }
    return r;
  }

  /// Formal derivative with respect to variable slot `var` (0..n-1 the
  /// holomorphic coordinates, n..2n-1 the conjugates). The result is exact
  /// only up to total degree 3: the top-degree coefficients of the source
  /// are consumed. Chain several to differentiate under jet arithmetic.
  Jet derivative(int var) const {
    Jet r(n_);
    for (int i = 0; i < tab_->count; ++i) {
      if (c_[i] == 0.0) continue;
      const auto& e = tab_->expo[i];
      if (e[var] == 0) continue;
      std::array<std::uint8_t, 4> f = e;
      f[var] -= 1;
      r.c_[tab_->index_of(f)] = c_[i] * double(e[var]);
    }
    return r;
  }

  /// Mixed Wirtinger derivative d^a dbar^b evaluated at the center:
  /// a, b are per-coordinate orders (a2, b2 ignored when n = 1).
  cd partial(int a1, int b1, int a2 = 0, int b2 = 0) const {
    std::array<std::uint8_t, 4> e{0, 0, 0, 0};
    if (n_ == 1) {
      e[0] = static_cast<std::uint8_t>(a1);
      e[1] = static_cast<std::uint8_t>(b1);
    } else {
      e[0] = static_cast<std::uint8_t>(a1);
      e[1] = static_cast<std::uint8_t>(a2);
      e[2] = static_cast<std::uint8_t>(b1);
      e[3] = static_cast<std::uint8_t>(b2);
    }
    int total = a1 + b1 + a2 + b2;
    if (total > detail::JetTables::kMaxDeg) throw Error("jet partial: order > 4");
    const int idx = tab_->index_of(e);
    return c_[idx] * tab_->fact[idx];
  }

 private:
  int n_;
  const detail::JetTables* tab_;
  std::vector<cd> c_;
};

/// The derivative data of a potential actually consumed by the geometry:
/// value, gradient, and the mixed blocks d^a dbar^b with a,b <= 2 written in
/// metric-facing notation. Plain arrays sized for n = 2 so instances can be
/// cached per grid node and combined linearly (paths are linear in their
/// member potentials).
struct PotentialJets {
  cd v{};
  cd d1[2]{};            // d_i
  cd d1b[2]{};           // dbar_i
  cd g[2][2]{};          // d_i dbar_j        (the metric contribution)
  cd dg[2][2][2]{};      // dg[k][i][j] = d_k d_i dbar_j
  cd dgb[2][2][2]{};     // dgb[k][i][j] = dbar_k d_i dbar_j
  cd ddg[2][2][2][2]{};  // ddg[k][l][i][j] = d_k dbar_l d_i dbar_j

  PotentialJets& axpy(double s, const PotentialJets& o) {
    v += s * o.v;
    for (int i = 0; i < 2; ++i) {
      d1[i] += s * o.d1[i];
      d1b[i] += s * o.d1b[i];
      for (int j = 0; j < 2; ++j) {
        g[i][j] += s * o.g[i][j];
        for (int k = 0; k < 2; ++k) {
          dg[k][i][j] += s * o.dg[k][i][j];
          dgb[k][i][j] += s * o.dgb[k][i][j];
          for (int l = 0; l < 2; ++l) ddg[k][l][i][j] += s * o.ddg[k][l][i][j];
        }
      }
    }
    return *this;
  }
};

inline PotentialJets extract_potential_jets(const Jet& jet) {
  const int n = jet.dim();
  PotentialJets p;
  p.v = jet.value();
  auto D = [&](int a1, int b1, int a2, int b2) { return jet.partial(a1, b1, a2, b2); };
  for (int i = 0; i < n; ++i) {
    std::array<int, 4> a{0, 0, 0, 0};
    a[i] = 1;
    p.d1[i] = D(a[0], 0, a[1], 0);
    p.d1b[i] = D(0, a[0], 0, a[1]);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::array<int, 2> ai{0, 0}, bj{0, 0};
      ai[i] += 1;
      bj[j] += 1;
      p.g[i][j] = D(ai[0], bj[0], ai[1], bj[1]);
      for (int k = 0; k < n; ++k) {
        std::array<int, 2> ak = ai;
        ak[k] += 1;
        p.dg[k][i][j] = D(ak[0], bj[0], ak[1], bj[1]);
        std::array<int, 2> bk = bj;
        bk[k] += 1;
        p.dgb[k][i][j] = D(ai[0], bk[0], ai[1], bk[1]);
        for (int l = 0; l < n; ++l) {
          std::array<int, 2> bl = bj;
          bl[l] += 1;
          p.ddg[k][l][i][j] = D(ak[0], bl[0], ak[1], bl[1]);
        }
      }
    }
  return p;
}

}  // namespace kenergy
