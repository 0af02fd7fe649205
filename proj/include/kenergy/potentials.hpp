#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "kenergy/grid.hpp"
#include "kenergy/jets.hpp"
#include "kenergy/manifold.hpp"

namespace kenergy {

/// Real scalar field on the manifold with exact 4-jets at chart points.
/// Fields cache their per-node jet tables per grid (keyed by grid uid), so
/// path evaluations that revisit the same nodes pay the jet arithmetic once.
class ScalarField {
 public:
  virtual ~ScalarField() = default;

  /// Full 4-jet at a chart point.
  virtual Jet jet(const ChartPoint& p) const = 0;

  /// Plain value; overridden where a direct formula is cheaper (finite
  /// difference probes call this many times).
  virtual double value(const ChartPoint& p) const { return jet(p).value().real(); }

  /// Cached table of extracted potential jets, one entry per grid node.
  const std::vector<PotentialJets>& jets_on(const QuadratureGrid& G) const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(G.uid);
    if (it != cache_.end()) return *it->second;
    auto table = std::make_shared<std::vector<PotentialJets>>();
    table->reserve(G.size());
    for (std::size_t i = 0; i < G.size(); ++i)
      table->push_back(extract_potential_jets(jet(G.nodes[i])));
    auto [pos, ok] = cache_.emplace(G.uid, std::move(table));
    (void)ok;
    return *pos->second;
  }

 private:
  mutable std::mutex cache_mutex_;
  mutable std::map<std::uint64_t, std::shared_ptr<std::vector<PotentialJets>>> cache_;
};

/// The reference potential of the manifold as a field (log(1+|z|^2) or |z|^2),
/// so metric assembly can treat "base + perturbation" uniformly. Chart-local:
/// values in different charts differ by pluriharmonic terms, which every
/// metric-level consumer is insensitive to.
class BasePotentialField final : public ScalarField {
 public:
  explicit BasePotentialField(const Manifold& M) : M_(M) {}
  Jet jet(const ChartPoint& p) const override { return M_.base_potential(p); }
  double value(const ChartPoint& p) const override {
    double s = std::norm(p.z[0]) + std::norm(p.z[1]);
    return M_.projective ? std::log1p(s) : s;
  }

 private:
  Manifold M_;
};

class ZeroField final : public ScalarField {
 public:
  explicit ZeroField(int n) : n_(n) {}
  Jet jet(const ChartPoint&) const override { return Jet::constant(n_, 0.0); }
  double value(const ChartPoint&) const override { return 0.0; }

 private:
  int n_;
};

class ConstantField final : public ScalarField {
 public:
  ConstantField(int n, double c) : n_(n), c_(c) {}
  Jet jet(const ChartPoint&) const override { return Jet::constant(n_, c_); }
  double value(const ChartPoint&) const override { return c_; }

 private:
  int n_;
  double c_;
};

/// Rotation-invariant potential on cp1/cp2: f(u) = sum_j c_j u^j with
/// u = |z|^2 / (1 + |z|^2) in [0, 1). Smooth on all of projective space
/// (u is the pullback of a globally smooth function, and evaluates
/// chart-covariantly through global_u).
class RadialPolynomial final : public ScalarField {
 public:
  RadialPolynomial(int n, std::vector<double> coeff) : n_(n), c_(std::move(coeff)) {
    if (c_.empty()) throw ConfigError("radial potential: empty coefficient list");
  }
  Jet jet(const ChartPoint& p) const override {
    const Jet u = global_u_jet(n_, p);
    Jet r = Jet::constant(n_, 0.0);
    for (std::size_t j = c_.size(); j-- > 0;) r = r * u + cd(c_[j]);
    return r * u;  // no constant term: coefficients start at u^1
  }
  double value(const ChartPoint& p) const override {
    const double u = global_u(n_, p);
    double r = 0.0;
    for (std::size_t j = c_.size(); j-- > 0;) r = r * u + c_[j];
    return r * u;
  }

 private:
  int n_;
  std::vector<double> c_;
};

/// One angular member on cp^n: Re(coef * z^A conj(z)^B) / (1+|z|^2)^d.
/// Requires |A| <= d and |B| <= d so the term extends smoothly across the
/// hyperplane at infinity. Homogeneously the term is the globally smooth
/// function Re(coef * Z_0^{d-|A|} Z^A conj(Z_0^{d-|B|} Z^B)) / |Z|^{2d}, so in
/// each chart it is again a monomial with nonnegative exponents over
/// (1 + |coords|^2)^d -- that is exactly how it is evaluated.
struct AngularTerm {
  int A[2]{};  // holomorphic exponents
  int B[2]{};  // antiholomorphic exponents
  int d = 1;
  cd coef{1.0};
};

namespace detail {
/// Exponents of the monomial part in the coordinates of `chart` (E lists the
/// chart-0 exponents over (z_1 .. z_n); the Z_0 exponent is implied, d - |E|).
/// Chart c >= 1 orders its coordinates as (1/z_c, z_other/z_c).
inline void chart_exponents(int n, int chart, const int E[2], int d, int out[2]) {
  if (chart == 0) {
    out[0] = E[0];
    out[1] = E[1];
    return;
  }
  out[0] = d - E[0] - E[1];
  out[1] = (n == 1) ? 0 : (chart == 1 ? E[1] : E[0]);
}
}  // namespace detail

class AngularPotential final : public ScalarField {
 public:
  AngularPotential(int n, std::vector<AngularTerm> terms) : n_(n), terms_(std::move(terms)) {
    for (const auto& t : terms_) {
      const int na = t.A[0] + t.A[1], nb = t.B[0] + t.B[1];
      if (na > t.d || nb > t.d)
        throw ConfigError("angular potential term not smooth at infinity: need |A|,|B| <= d");
      if (t.d > 2) throw ConfigError("angular potential: d <= 2 keeps jets within degree 4");
    }
  }
  Jet jet(const ChartPoint& p) const override {
    Jet s = Jet::constant(n_, 1.0);
    std::array<Jet, 2> z{Jet::constant(n_, 0.0), Jet::constant(n_, 0.0)};
    std::array<Jet, 2> zb{Jet::constant(n_, 0.0), Jet::constant(n_, 0.0)};
    for (int i = 0; i < n_; ++i) {
      z[i] = Jet::variable(n_, i, p.z[i]);
      zb[i] = Jet::conj_variable(n_, i, p.z[i]);
      s += z[i] * zb[i];
    }
    Jet total = Jet::constant(n_, 0.0);
    for (const auto& t : terms_) {
      int A[2], B[2];
      detail::chart_exponents(n_, p.chart, t.A, t.d, A);
      detail::chart_exponents(n_, p.chart, t.B, t.d, B);
      Jet mono = Jet::constant(n_, t.coef);
      for (int i = 0; i < n_; ++i) {
        if (A[i]) mono = mono * z[i].pow(A[i]);
        if (B[i]) mono = mono * zb[i].pow(B[i]);
      }
      mono = mono * s.pow(-t.d);
      total += mono * 0.5 + (mono * 0.5).conj();  // real part
    }
    return total;
  }
  double value(const ChartPoint& p) const override {
    const double s = 1.0 + std::norm(p.z[0]) + std::norm(p.z[1]);
    cd total = 0.0;
    for (const auto& t : terms_) {
      int A[2], B[2];
      detail::chart_exponents(n_, p.chart, t.A, t.d, A);
      detail::chart_exponents(n_, p.chart, t.B, t.d, B);
      cd mono = t.coef;
      for (int i = 0; i < n_; ++i) {
        for (int k = 0; k < A[i]; ++k) mono *= p.z[i];
        for (int k = 0; k < B[i]; ++k) mono *= std::conj(p.z[i]);
      }
      total += mono * std::pow(s, -t.d);
    }
    return total.real();
  }

 private:
  int n_;
  std::vector<AngularTerm> terms_;
};

/// Torus Fourier mode: amp_c cos(2 pi (p x + q y)) + amp_s sin(2 pi (p x + q y))
/// with z = x + i y, built through exp jets of the linear phase.
class TorusFourier final : public ScalarField {
 public:
  struct Mode {
    int p = 1, q = 0;
    double amp_cos = 0.0, amp_sin = 0.0;
  };
  explicit TorusFourier(std::vector<Mode> modes) : modes_(std::move(modes)) {}
  Jet jet(const ChartPoint& pt) const override {
    if (pt.chart != 0) throw Error("torus fields live in chart 0 only");
    const Jet z = Jet::variable(1, 0, pt.z[0]);
    const Jet zb = Jet::conj_variable(1, 0, pt.z[0]);
    Jet total = Jet::constant(1, 0.0);
    for (const auto& m : modes_) {
      // i * 2 pi (p x + q y) = z (pi q + i pi p) + zb (-pi q + i pi p)
      const Jet phase = z * cd(M_PI * m.q, M_PI * m.p) + zb * cd(-M_PI * m.q, M_PI * m.p);
      const Jet e = phase.exp();
      total += e * cd(0.5 * m.amp_cos, 0.0) + e.conj() * cd(0.5 * m.amp_cos, 0.0) +
               (e - e.conj()) * cd(0.0, -0.5 * m.amp_sin);
    }
    return total;
  }
  double value(const ChartPoint& pt) const override {
    const double x = pt.z[0].real(), y = pt.z[0].imag();
    double r = 0.0;
    for (const auto& m : modes_) {
      const double a = 2.0 * M_PI * (m.p * x + m.q * y);
      r += m.amp_cos * std::cos(a) + m.amp_sin * std::sin(a);
    }
    return r;
  }

 private:
  std::vector<Mode> modes_;
};

/// Linear combination of borrowed fields (the families are linear, and paths
/// vary only the coefficients).
class LinearCombination final : public ScalarField {
 public:
  LinearCombination(int n, std::vector<std::pair<double, const ScalarField*>> parts)
      : n_(n), parts_(std::move(parts)) {}
  Jet jet(const ChartPoint& p) const override {
    Jet total = Jet::constant(n_, 0.0);
    for (const auto& [c, f] : parts_) total += f->jet(p) * cd(c);
    return total;
  }
  double value(const ChartPoint& p) const override {
    double total = 0.0;
    for (const auto& [c, f] : parts_) total += c * f->value(p);
    return total;
  }

 private:
  int n_;
  std::vector<std::pair<double, const ScalarField*>> parts_;
};

}  // namespace kenergy
