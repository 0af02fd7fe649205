#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "kenergy/functionals.hpp"

namespace kenergy {

namespace detail {

/// Homogeneous index carried by each local slot of a projective chart
/// (slot 0 is the coordinate the chart normalizes to 1, slots 1..n are the
/// affine coordinates in their stored order). Chart c >= 1 divides by Z_c and
/// orders its coordinates as (Z_0/Z_c, Z_other/Z_c).
inline const int* chart_slots(int n, int chart) {
  static const int cp1[2][2] = {{0, 1}, {1, 0}};
  static const int cp2[3][3] = {{0, 1, 2}, {1, 0, 2}, {2, 0, 1}};
  if (chart < 0 || chart > n) throw Error("chart_slots: chart out of range");
  return n == 1 ? cp1[chart] : cp2[chart];
}

}  // namespace detail

/// A holomorphic vector field on one of the models.
///
/// Projective models carry the field of a gl(n+1) matrix m acting on
/// homogeneous coordinates, Z |-> m Z.  In the chart normalizing slot 0 the
/// components are the classical projective quadratics
///   X^i(v) = mt_{i0} + sum_j mt_{ij} v_j - v_i (mt_{00} + sum_j mt_{0j} v_j),
/// where mt is m conjugated by the chart's slot permutation; the same formula
/// therefore evaluates the field in every chart.  The flat torus carries the
/// constant fields b d/dz (chart 0 only).
class HolomorphicField {
 public:
  static HolomorphicField projective_field(int n, const std::array<std::array<cd, 3>, 3>& m) {
    if (n < 1 || n > 2) throw ConfigError("holomorphic field: need n = 1 or 2");
    HolomorphicField X;
    X.n_ = n;
    X.projective_ = true;
    for (int a = 0; a <= n; ++a)
      for (int b = 0; b <= n; ++b) X.m_[a][b] = m[a][b];
    return X;
  }

  /// The diagonal field diag(0, a_1, a_2): X = sum_i a_i z_i d/dz_i in chart 0.
  static HolomorphicField diagonal(const Manifold& M, cd a1, cd a2 = 0.0) {
    if (!M.projective) throw ConfigError("holomorphic field: diagonal needs a projective model");
    std::array<std::array<cd, 3>, 3> m{};
    m[1][1] = a1;
    if (M.n == 2) m[2][2] = a2;
    return projective_field(M.n, m);
  }

  static HolomorphicField torus_constant(cd b) {
    HolomorphicField X;
    X.n_ = 1;
    X.projective_ = false;
    X.b_ = b;
    return X;
  }

  int dim() const { return n_; }
  bool on_projective() const { return projective_; }
  cd matrix(int a, int b) const { return m_[a][b]; }

  /// Chart components X^i at p.
  std::array<cd, 2> components(const ChartPoint& p) const {
    if (!projective_) {
      if (p.chart != 0) throw Error("torus fields live in chart 0 only");
      return {b_, cd(0.0)};
    }
    const int* sl = detail::chart_slots(n_, p.chart);
    cd mt[3][3];
    for (int a = 0; a <= n_; ++a)
      for (int b = 0; b <= n_; ++b) mt[a][b] = m_[sl[a]][sl[b]];
    std::array<cd, 2> X{cd(0.0), cd(0.0)};
    cd inv_row = mt[0][0];  // mt_{00} + sum_j mt_{0j} v_j
    for (int j = 0; j < n_; ++j) inv_row += mt[0][j + 1] * p.z[j];
    for (int i = 0; i < n_; ++i) {
      cd v = mt[i + 1][0];
      for (int j = 0; j < n_; ++j) v += mt[i + 1][j + 1] * p.z[j];
      X[i] = v - p.z[i] * inv_row;
    }
    return X;
  }

  /// Jets of the chart components (polynomials in the chart coordinates).
  std::array<Jet, 2> component_jets(const ChartPoint& p) const {
    std::array<Jet, 2> X{Jet(n_), Jet(n_)};
    if (!projective_) {
      if (p.chart != 0) throw Error("torus fields live in chart 0 only");
      X[0] = Jet::constant(n_, b_);
      return X;
    }
    const int* sl = detail::chart_slots(n_, p.chart);
    cd mt[3][3];
    for (int a = 0; a <= n_; ++a)
      for (int b = 0; b <= n_; ++b) mt[a][b] = m_[sl[a]][sl[b]];
    std::array<Jet, 2> v{Jet(n_), Jet(n_)};
    for (int i = 0; i < n_; ++i) v[i] = Jet::variable(n_, i, p.z[i]);
    Jet inv_row = Jet::constant(n_, mt[0][0]);
    for (int j = 0; j < n_; ++j) inv_row += mt[0][j + 1] * v[j];
    for (int i = 0; i < n_; ++i) {
      Jet r = Jet::constant(n_, mt[i + 1][0]);
      for (int j = 0; j < n_; ++j) r += mt[i + 1][j + 1] * v[j];
      X[i] = r - v[i] * inv_row;
    }
    return X;
  }

  /// Holomorphy potential of the field against the reference metric, in the
  /// convention  dbar theta = iota_X omega:
  ///   theta0 = i (conj(Z)^T m Z) / |Z|^2,
  /// a global function, evaluated through the chart of p.  Perturbed metrics
  /// omega_phi shift it by the derived function X(phi), see theta_values.
  cd base_theta(const ChartPoint& p) const {
    if (!projective_)
      throw ConfigError("constant torus fields have no global holomorphy potential; use solve_theta");
    const int* sl = detail::chart_slots(n_, p.chart);
    cd zhat[3] = {1.0, p.z[0], p.z[1]};
    double D = 1.0;
    for (int i = 0; i < n_; ++i) D += std::norm(p.z[i]);
    cd num = 0.0;
    for (int a = 0; a <= n_; ++a)
      for (int b = 0; b <= n_; ++b) num += std::conj(zhat[a]) * m_[sl[a]][sl[b]] * zhat[b];
    return cd(0.0, 1.0) * num / D;
  }

  Jet base_theta_jet(const ChartPoint& p) const {
    if (!projective_)
      throw ConfigError("constant torus fields have no global holomorphy potential; use solve_theta");
    const int* sl = detail::chart_slots(n_, p.chart);
    Jet zhat[3] = {Jet::constant(n_, 1.0), Jet(n_), Jet(n_)};
    for (int i = 0; i < n_; ++i) zhat[i + 1] = Jet::variable(n_, i, p.z[i]);
    Jet D = Jet::constant(n_, 1.0);
    for (int i = 0; i < n_; ++i)
      D += zhat[i + 1] * zhat[i + 1].conj();
    Jet num = Jet::constant(n_, 0.0);
    for (int a = 0; a <= n_; ++a)
      for (int b = 0; b <= n_; ++b) num += zhat[a].conj() * (m_[sl[a]][sl[b]] * zhat[b]);
    return cd(0.0, 1.0) * num * D.inv();
  }

 private:
  int n_ = 1;
  bool projective_ = true;
  cd m_[3][3] = {};
  cd b_ = 0.0;
};

/// theta_X of omega_phi at every grid node: theta0 + i X(phi), where X(phi) =
/// sum_l X^l d_l phi.  The factor i comes from contracting omega_phi = omega
/// + i ddbar phi: iota_X(i ddbar phi) = i dbar(X(phi)) for holomorphic X.
/// Projective models only; the torus obstruction is handled by solve_theta.
inline std::vector<cd> theta_values(const Manifold& M, const QuadratureGrid& G,
                                    const HolomorphicField& X, const ScalarField* phi) {
  if (!X.on_projective()) throw ConfigError("theta_values: projective models only");
  const std::vector<PotentialJets>* pj = phi ? &phi->jets_on(G) : nullptr;
  std::vector<cd> th(G.size());
  for (std::size_t i = 0; i < G.size(); ++i) {
    cd v = X.base_theta(G.nodes[i]);
    if (pj) {
      const auto Xc = X.components(G.nodes[i]);
      for (int l = 0; l < M.n; ++l) v += cd(0.0, 1.0) * Xc[l] * (*pj)[i].d1[l];
    }
    th[i] = v;
  }
  return th;
}

/// Higher Futaki-type invariant
///   F_k(X, omega_phi) = -(n-k+1) i \int theta_X (c_k - mu omega_phi^k)
///                                       ^ omega_phi^{n-k},
/// with theta_X in the dbar theta = iota_X omega convention.  Pass mu from
/// mu_k on the same grid so the defect has exactly zero quadrature mean and
/// the constant ambiguity of theta drops at round-off level.  For the torus a
/// theta_override (from solve_theta) is required.  With mu = 0 the function
/// returns the plain Chern pairing -(n-k+1) i \int theta c_k ^ omega^{n-k},
/// a nonzero quantity useful for cross-validating pipelines.
inline cd futaki_invariant(const Manifold& M, const QuadratureGrid& G,
                           const HolomorphicField& X, const ScalarField* phi, int k, double mu,
                           int threads, const std::vector<cd>* theta_override = nullptr) {
  if (k < 1 || k > M.n) throw ConfigError("futaki_invariant: need 1 <= k <= n");
  (void)threads;  // the pass is kept serial and deterministic
  std::vector<cd> theta;
  if (!theta_override) {
    theta = theta_values(M, G, X, phi);
    theta_override = &theta;
  }
  BasePotentialField base(M);
  const auto& base_jets = base.jets_on(G);
  const std::vector<PotentialJets>* pj = phi ? &phi->jets_on(G) : nullptr;
  Accum re, im;
  for (std::size_t i = 0; i < G.size(); ++i) {
    PotentialJets tot = base_jets[i];
    if (pj) tot.axpy(1.0, (*pj)[i]);
    const MetricPoint m = metric_from_jets(tot, M.n);
    const FormValue omega = omega_form(m);
    const FormValue defect = chern_form(m, k) - wedge_pow(omega, k) * cd(mu);
    const double dt = top_density(wedge(defect, wedge_pow(omega, M.n - k)));
    const cd c = (*theta_override)[i] * (G.weights[i] * dt);
    re.add(c.real());
    im.add(c.imag());
  }
  return -(M.n - k + 1.0) * cd(0.0, 1.0) * cd(re.total(), im.total());
}

struct ThetaSolveOptions {
  int torus_modes = 3;          // Fourier bandwidth of the torus basis
  bool include_derived = true;  // add X(phi) to the basis
};

struct ThetaSolveResult {
  std::vector<cd> coeff;   // coefficients over the internal basis
  cd alpha{0.0};           // harmonic (0,1) obstruction (torus only)
  double residual = 0.0;   // relative L2 residual of the dbar equation
  std::vector<cd> values;  // theta at the nodes, volume-mean zero
};

/// Least-squares Galerkin solve of the holomorphy-potential equation
///   dbar theta = iota_X omega_phi          (projective models)
///   dbar theta + alpha dzbar = iota_X omega_phi   (torus),
/// row-weighted by sqrt(w_i rho_i) with rho the omega_phi^n density.  The
/// basis is the span of the matrix potentials i conj(Z)_a Z_b / |Z|^2
/// (projective) or the Fourier modes exp(2 pi i (p x + q y)) (torus), plus
/// the derived function X(phi); for the model families the exact solution
/// lies in this span, so the residual measures nothing but consistency of
/// the assembled metric with the field -- an independent check on the closed
/// form used by theta_values.  On the torus, constant fields are not
/// Hamiltonian: the harmonic component alpha absorbs the obstruction.
inline ThetaSolveResult solve_theta(const Manifold& M, const QuadratureGrid& G,
                                    const HolomorphicField& X, const ScalarField* phi,
                                    int threads = 1, const ThetaSolveOptions& opt = {}) {
  (void)threads;
  const int n = M.n;
  const std::size_t N = G.size();
  const std::vector<PotentialJets>* pj = phi ? &phi->jets_on(G) : nullptr;
  BasePotentialField base(M);
  const auto& base_jets = base.jets_on(G);

  // Column catalogue: basis values and dbar-components per node.
  struct Basis {
    std::vector<cd> value;         // N
    std::vector<std::array<cd, 2>> dbar;  // N x n
  };
  std::vector<Basis> cols;
  const bool derived = opt.include_derived && phi != nullptr;

  if (M.projective) {
    const int np1 = n + 1;
    cols.resize(static_cast<std::size_t>(np1) * np1 + (derived ? 1 : 0));
    for (auto& c : cols) {
      c.value.resize(N);
      c.dbar.resize(N);
    }
    for (std::size_t i = 0; i < N; ++i) {
      const ChartPoint& p = G.nodes[i];
      const int* sl = detail::chart_slots(n, p.chart);
      int inv_sl[3];  // homogeneous index -> slot
      for (int s = 0; s <= n; ++s) inv_sl[sl[s]] = s;
      cd zhat[3] = {1.0, p.z[0], p.z[1]};
      double D = 1.0;
      for (int l = 0; l < n; ++l) D += std::norm(p.z[l]);
      for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b) {
          Basis& col = cols[static_cast<std::size_t>(a) * np1 + b];
          const int sa = inv_sl[a], sb = inv_sl[b];
          const cd za = std::conj(zhat[sa]), zb = zhat[sb];
          col.value[i] = cd(0.0, 1.0) * za * zb / D;
          for (int j = 0; j < n; ++j) {
            cd d = -za * zb * p.z[j] / D;
            if (sa == j + 1) d += zb;
            col.dbar[i][j] = cd(0.0, 1.0) * d / D;
          }
        }
    }
  } else {
    const int P = opt.torus_modes;
    if (P < 1) throw ConfigError("solve_theta: torus_modes must be positive");
    cols.resize(static_cast<std::size_t>(2 * P + 1) * (2 * P + 1) - 1 + (derived ? 1 : 0));
    for (auto& c : cols) {
      c.value.resize(N);
      c.dbar.resize(N);
    }
    std::size_t m = 0;
    for (int p = -P; p <= P; ++p)
      for (int q = -P; q <= P; ++q) {
        if (p == 0 && q == 0) continue;
        Basis& col = cols[m++];
        for (std::size_t i = 0; i < N; ++i) {
          const double x = G.nodes[i].z[0].real(), y = G.nodes[i].z[0].imag();
          const cd e = std::exp(cd(0.0, 2.0 * M_PI * (p * x + q * y)));
          col.value[i] = e;
          col.dbar[i][0] = cd(0.0, M_PI) * cd(p, q) * e;
        }
      }
  }
  if (derived) {
    // the derived function i X(phi); with this normalization the exact
    // solution theta0 + i X(phi) carries coefficient one on this column
    Basis& col = cols.back();
    col.value.resize(N);
    col.dbar.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
      const auto Xc = X.components(G.nodes[i]);
      cd v = 0.0;
      for (int l = 0; l < n; ++l) v += Xc[l] * (*pj)[i].d1[l];
      col.value[i] = cd(0.0, 1.0) * v;
      for (int j = 0; j < n; ++j) {
        cd d = 0.0;
        for (int l = 0; l < n; ++l) d += Xc[l] * (*pj)[i].g[l][j];
        col.dbar[i][j] = cd(0.0, 1.0) * d;
      }
    }
  }

  // Right-hand side (iota_X omega_phi)_jbar = i X^l g_{l jbar}, node weights,
  // and densities for the mean normalization.
  const bool torus_alpha = !M.projective;
  const std::size_t ncols = cols.size() + (torus_alpha ? 1 : 0);
  const std::size_t nrows = N * static_cast<std::size_t>(n);
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(nrows, ncols);
  Eigen::VectorXcd rhs(nrows);
  std::vector<double> dens(N);
  for (std::size_t i = 0; i < N; ++i) {
    PotentialJets tot = base_jets[i];
    if (pj) tot.axpy(1.0, (*pj)[i]);
    const MetricPoint mp = metric_from_jets(tot, n);
    dens[i] = top_density(wedge_pow(omega_form(mp), n));
    const double rw = std::sqrt(G.weights[i] * dens[i]);
    const auto Xc = X.components(G.nodes[i]);
    for (int j = 0; j < n; ++j) {
      cd b = 0.0;
      for (int l = 0; l < n; ++l) b += Xc[l] * mp.g[l][j];
      rhs(i * n + j) = rw * cd(0.0, 1.0) * b;
      for (std::size_t m = 0; m < cols.size(); ++m) A(i * n + j, m) = rw * cols[m].dbar[i][j];
      if (torus_alpha) A(i * n + j, ncols - 1) = rw;
    }
  }

  Eigen::VectorXcd x = Eigen::ColPivHouseholderQR<Eigen::MatrixXcd>(A).solve(rhs);
  ThetaSolveResult out;
  out.residual = (A * x - rhs).norm() / std::max(rhs.norm(), 1e-300);
  out.coeff.assign(x.data(), x.data() + cols.size());
  if (torus_alpha) out.alpha = x(ncols - 1);

  out.values.assign(N, cd(0.0));
  for (std::size_t m = 0; m < cols.size(); ++m)
    for (std::size_t i = 0; i < N; ++i) out.values[i] += x(m) * cols[m].value[i];
  Accum vre, vim, vol;
  for (std::size_t i = 0; i < N; ++i) {
    const double w = G.weights[i] * dens[i];
    vre.add(w * out.values[i].real());
    vim.add(w * out.values[i].imag());
    vol.add(w);
  }
  const cd mean = cd(vre.total(), vim.total()) / vol.total();
  for (auto& v : out.values) v -= mean;
  return out;
}

/// Path of potentials generated by a diagonal automorphism flow on cp^n: in
/// homogeneous coordinates sigma_t Z = (Z_0, e^{a_1 t} Z_1, e^{a_2 t} Z_2),
/// and phi_t is the global function
///   phi_t = log( sum_a e^{2 h_a t} |Z_a|^2 / |Z|^2 ),     h = (0, a_1, a_2),
/// the potential of sigma_t^* omega_ref relative to omega_ref.  In a chart
/// normalizing homogeneous slot s0 this is log(1 + sum_k lambda_k^2 |v_k|^2)
/// + 2 h_{s0} t - log(1 + |v|^2) with lambda_k = e^{(h_k - h_{s0}) t}; the
/// per-chart constant keeps the values of one global function, so velocities
/// agree across chart seams (phidot_t = 2 Im theta_t pointwise).  The path
/// parameter runs tau in [0,1] with t = t0 + (t1 - t0) tau; velocities are
/// d/dtau.  The generating field is diag(0, a_1, a_2).
class FlowPath final : public MetricPath {
 public:
  FlowPath(const Manifold& M, std::array<double, 2> a, double t0 = 0.0, double t1 = 1.0)
      : M_(M), a_(a), t0_(t0), t1_(t1) {
    if (!M.projective) throw ConfigError("automorphism flows need a projective model");
  }

  int dim() const override { return M_.n; }
  double flow_time(double tau) const { return t0_ + (t1_ - t0_) * tau; }
  HolomorphicField generator() const { return HolomorphicField::diagonal(M_, a_[0], a_[1]); }

  PotentialJets total_jets(const QuadratureGrid& G, std::size_t i, double tau) const override {
    const double t = flow_time(tau);
    const ChartPoint& p = G.nodes[i];
    const int* sl = detail::chart_slots(M_.n, p.chart);
    const double h[3] = {0.0, a_[0], a_[1]};
    Jet S = Jet::constant(M_.n, 1.0);
    for (int k = 0; k < M_.n; ++k) {
      const double lam2 = std::exp(2.0 * (h[sl[k + 1]] - h[sl[0]]) * t);
      S += lam2 * (Jet::variable(M_.n, k, p.z[k]) * Jet::conj_variable(M_.n, k, p.z[k]));
    }
    return extract_potential_jets(S.log() + cd(2.0 * h[sl[0]] * t));
  }

  PotentialJets velocity_jets(const QuadratureGrid& G, std::size_t i, double tau) const override {
    const double t = flow_time(tau);
    const ChartPoint& p = G.nodes[i];
    const int* sl = detail::chart_slots(M_.n, p.chart);
    const double h[3] = {0.0, a_[0], a_[1]};
    Jet S = Jet::constant(M_.n, 1.0);
    Jet Sdot = Jet::constant(M_.n, 0.0);
    for (int k = 0; k < M_.n; ++k) {
      const double ht = h[sl[k + 1]] - h[sl[0]];
      const double lam2 = std::exp(2.0 * ht * t);
      const Jet zz = Jet::variable(M_.n, k, p.z[k]) * Jet::conj_variable(M_.n, k, p.z[k]);
      S += lam2 * zz;
      Sdot += (2.0 * ht * lam2) * zz;
    }
    Jet vel = Sdot * S.inv() + cd(2.0 * h[sl[0]]);
    return extract_potential_jets((t1_ - t0_) * vel);
  }

  /// phi_t at node i, normalized to zero mean against the reference volume.
  double potential_value(const QuadratureGrid& G, std::size_t i, double tau) const {
    return raw_value(G.nodes[i], flow_time(tau)) - mean_at(G, flow_time(tau));
  }

  double sup_abs_potential(const QuadratureGrid& G, double tau) const {
    const double t = flow_time(tau);
    const double mean = mean_at(G, t);
    double sup = 0.0;
    for (std::size_t i = 0; i < G.size(); ++i)
      sup = std::max(sup, std::abs(raw_value(G.nodes[i], t) - mean));
    return sup;
  }

 private:
  double raw_value(const ChartPoint& p, double t) const {
    const int* sl = detail::chart_slots(M_.n, p.chart);
    const double h[3] = {0.0, a_[0], a_[1]};
    double S = 1.0, s = 1.0;
    for (int k = 0; k < M_.n; ++k) {
      S += std::exp(2.0 * (h[sl[k + 1]] - h[sl[0]]) * t) * std::norm(p.z[k]);
      s += std::norm(p.z[k]);
    }
    return std::log(S / s) + 2.0 * h[sl[0]] * t;
  }

  double mean_at(const QuadratureGrid& G, double t) const {
    std::lock_guard<std::mutex> lock(mu_);
    const auto key = std::make_pair(G.uid, t);
    auto it = mean_cache_.find(key);
    if (it != mean_cache_.end()) return it->second;
    auto& dens = dens_cache_[G.uid];
    if (dens.empty()) {
      BasePotentialField base(M_);
      const auto& bj = base.jets_on(G);
      dens.resize(G.size());
      for (std::size_t i = 0; i < G.size(); ++i)
        dens[i] = top_density(wedge_pow(omega_form(metric_from_jets(bj[i], M_.n)), M_.n));
    }
    Accum num, den;
    for (std::size_t i = 0; i < G.size(); ++i) {
      num.add(G.weights[i] * dens[i] * raw_value(G.nodes[i], t));
      den.add(G.weights[i] * dens[i]);
    }
    const double mean = num.total() / den.total();
    mean_cache_[key] = mean;
    return mean;
  }

  Manifold M_;
  std::array<double, 2> a_;
  double t0_, t1_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<std::uint64_t, double>, double> mean_cache_;
  mutable std::map<std::uint64_t, std::vector<double>> dens_cache_;
};

/// The flow potential phi_t at one fixed time, as a coefficient-family field
/// (useful to hand a flowed metric to the invariant and energy machinery).
/// Not mean-normalized: every consumer here is insensitive to constants.
class FlowPotential final : public ScalarField {
 public:
  FlowPotential(const Manifold& M, std::array<double, 2> a, double t) : M_(M), a_(a), t_(t) {
    if (!M.projective) throw ConfigError("automorphism flows need a projective model");
  }

  Jet jet(const ChartPoint& p) const override {
    const int* sl = detail::chart_slots(M_.n, p.chart);
    const double h[3] = {0.0, a_[0], a_[1]};
    Jet S = Jet::constant(M_.n, 1.0);
    for (int k = 0; k < M_.n; ++k) {
      const double lam2 = std::exp(2.0 * (h[sl[k + 1]] - h[sl[0]]) * t_);
      S += lam2 * (Jet::variable(M_.n, k, p.z[k]) * Jet::conj_variable(M_.n, k, p.z[k]));
    }
    return S.log() + cd(2.0 * h[sl[0]] * t_) - M_.base_potential(p);
  }

 private:
  Manifold M_;
  std::array<double, 2> a_;
  double t_;
};

namespace detail {

inline std::vector<double> poly_derivative(const std::vector<double>& c) {
  std::vector<double> d(c.size() > 1 ? c.size() - 1 : 1, 0.0);
  for (std::size_t j = 1; j < c.size(); ++j) d[j - 1] = j * c[j];
  return d;
}

inline double poly_eval(const std::vector<double>& c, double u) {
  double r = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) r = r * u + c[j];
  return r;
}

}  // namespace detail

struct RadialFutakiResult {
  cd invariant;      // the full defect pairing F_1(X)
  cd chern_pairing;  // the mu = 0 pairing -i int theta c_1 (nonzero in general)
};

/// Second, jet-free route to the cp^1 Futaki pairing for rotation-invariant
/// potentials phi = sum_j c_j u^{j+1} and fields with diagonal part a
/// (X = a z d/dz + ...; the off-diagonal parts pair to zero by parity).
/// Everything reduces to polynomials in u = s/(1+s): with
///   q(u) = u + u(1-u) Phi'(u)          (= s K'(s), so the metric is
///   P(u) = q'(u)                        g = (1-u)^2 P(u) > 0),
/// the holomorphy potential is theta = i a q(u), the defect antiderivative is
/// G(u) = u[(1-u) P'/P - 2] + 2 q(u), which vanishes at both ends (its value
/// at u = 1 is the Gauss-Bonnet normalization 2 pi mu_1 - 2 = 0), and
/// integration by parts gives
///   F_1 = -i int theta' G du = -i int_0^1 (i a P) G du,
///   -i int theta c_1 = -2 i theta(1) - i int_0^1 (i a P) u[(1-u) P'/P - 2] du.
inline RadialFutakiResult futaki_via_fk(const std::vector<double>& radial_coeff, cd a,
                                        int quad_n = 96) {
  // q = u + u(1-u) Phi'(u) with Phi = sum_j radial_coeff[j] u^{j+1}
  std::vector<double> phid(radial_coeff.size() + 1, 0.0);
  for (std::size_t j = 0; j < radial_coeff.size(); ++j) phid[j] = (j + 1.0) * radial_coeff[j];
  std::vector<double> q(phid.size() + 2, 0.0);
  q[1] += 1.0;
  for (std::size_t j = 0; j < phid.size(); ++j) {
    q[j + 1] += phid[j];   // u * Phi'
    q[j + 2] -= phid[j];   // -u^2 * Phi'
  }
  const std::vector<double> P = detail::poly_derivative(q);
  const std::vector<double> Pd = detail::poly_derivative(P);

  std::vector<double> x, w;
  gauss_legendre(quad_n, 0.0, 1.0, x, w);
  Accum inv_re, inv_im, ch_re, ch_im;
  for (int i = 0; i < quad_n; ++i) {
    const double u = x[i];
    const double Pu = detail::poly_eval(P, u);
    if (Pu <= 0.0) throw AdmissibilityError("radial potential leaves the Kaehler cone");
    const double Gc = u * ((1.0 - u) * detail::poly_eval(Pd, u) / Pu - 2.0);
    const double G = Gc + 2.0 * detail::poly_eval(q, u);
    const cd thd = cd(0.0, 1.0) * a * Pu;  // d theta / du, theta = i a q(u)
    const cd fi = cd(0.0, -1.0) * thd * G;
    const cd fc = cd(0.0, -1.0) * thd * Gc;
    inv_re.add(w[i] * fi.real());
    inv_im.add(w[i] * fi.imag());
    ch_re.add(w[i] * fc.real());
    ch_im.add(w[i] * fc.imag());
  }
  RadialFutakiResult out;
  out.invariant = cd(inv_re.total(), inv_im.total());
  // boundary term of the integration by parts: theta(1) = i a
  out.chern_pairing = 2.0 * a + cd(ch_re.total(), ch_im.total());
  return out;
}

}  // namespace kenergy
