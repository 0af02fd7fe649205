#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "kenergy/forms.hpp"
#include "kenergy/potentials.hpp"

namespace kenergy {

/// Curvature of the Chern connection on T^{1,0} as an endomorphism-valued
/// (1,1) form: F[a][b] = sum_{i,j} R_{a gbar i jbar} g^{gbar b} dz^i dzbar^j.
struct CurvatureEndo {
  int n = 1;
  FormValue F[2][2];
};

inline CurvatureEndo curvature_endo(const MetricPoint& m) {
  CurvatureEndo E;
  E.n = m.n;
  for (int a = 0; a < m.n; ++a)
    for (int b = 0; b < m.n; ++b) {
      FormValue f;
      f.n = m.n;
      for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) {
          cd v = 0.0;
          for (int g = 0; g < m.n; ++g) v += m.R[a][g][i][j] * m.ginv[g][b];
          f.at(1 << i, 1 << j) = v;
        }
      E.F[a][b] = f;
    }
  return E;
}

inline FormValue trace_form(const CurvatureEndo& E) {
  FormValue t = FormValue::scalar(E.n, 0.0);
  for (int a = 0; a < E.n; ++a) t += E.F[a][a];
  return t;
}

/// k-th Chern form of the metric at a point:
///   c_k = (1/k!) (i/2pi)^k sum_{pi in S_k} sgn(pi)
///         F^{a_1}_{a_pi(1)} wedge ... wedge F^{a_k}_{a_pi(k)}.
/// Specialized to k = 1, 2 (all that occurs for n <= 2).
inline FormValue chern_form(const MetricPoint& m, int k) {
  if (k < 1 || k > m.n) throw ConfigError("chern_form: need 1 <= k <= n");
  const CurvatureEndo E = curvature_endo(m);
  const cd i2pi = cd(0.0, 1.0 / (2.0 * M_PI));
  if (k == 1) return trace_form(E) * i2pi;
  // k = 2: (1/2)(i/2pi)^2 [ (Tr F)^2 - Tr(F wedge F) ]
  const FormValue tr = trace_form(E);
  FormValue tr2 = wedge(tr, tr);
  FormValue trFF = FormValue::scalar(m.n, 0.0);
  for (int a = 0; a < m.n; ++a)
    for (int b = 0; b < m.n; ++b) trFF += wedge(E.F[a][b], E.F[b][a]);
  return (tr2 - trFF) * (0.5 * i2pi * i2pi);
}

/// First Chern form by the independent log-determinant route:
///   c_1 = -(i/2pi) ddbar log det g,
/// evaluated with jet arithmetic on det g built from derivative jets of the
/// total potential. Exercises none of the curvature-tensor code, so it cross
/// checks the endomorphism-trace route.
inline FormValue chern1_logdet(const Jet& total_potential) {
  const int n = total_potential.dim();
  auto g_jet = [&](int i, int j) { return total_potential.derivative(i).derivative(n + j); };
  Jet det(n);
  if (n == 1)
    det = g_jet(0, 0);
  else
    det = g_jet(0, 0) * g_jet(1, 1) - g_jet(0, 1) * g_jet(1, 0);
  const Jet L = det.log();
  FormValue f;
  f.n = n;
  const cd pref = cd(0.0, -1.0 / (2.0 * M_PI));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      f.at(1 << i, 1 << j) = pref * L.derivative(i).derivative(n + j).value();
  return f;
}

/// Path in the space of Kaehler potentials, presented through the jets of the
/// *total* potential (reference + phi_t) and of the velocity phi_dot_t at
/// grid nodes. Implementations cache whatever makes them cheap per (t, node).
class MetricPath {
 public:
  virtual ~MetricPath() = default;
  virtual int dim() const = 0;
  /// Jets of base + phi_t at node i.
  virtual PotentialJets total_jets(const QuadratureGrid& G, std::size_t i, double t) const = 0;
  /// Jets of the velocity phi_dot_t at node i.
  virtual PotentialJets velocity_jets(const QuadratureGrid& G, std::size_t i, double t) const = 0;
};

/// phi_t = sum_j sigma_j(t) psi_j over a fixed member list; the per-node jet
/// tables of the members and the reference potential are cached on first use,
/// so each (t, node) visit is a short linear combination.
class CombinationPath final : public MetricPath {
 public:
  struct Member {
    const ScalarField* field = nullptr;
    std::function<double(double)> sigma;       // weight at time t
    std::function<double(double)> sigma_dot;   // d/dt weight
  };

  /// Optional base_shift adds a constant-in-t field on top of the reference
  /// potential (a path measured against the shifted metric omega_shift).
  CombinationPath(const Manifold& M, std::vector<Member> members,
                  const ScalarField* base_shift = nullptr)
      : M_(M), base_(std::make_shared<BasePotentialField>(M)), members_(std::move(members)) {
    if (base_shift)
      members_.push_back(
          {base_shift, [](double) { return 1.0; }, [](double) { return 0.0; }});
  }

  int dim() const override { return M_.n; }

  PotentialJets total_jets(const QuadratureGrid& G, std::size_t i, double t) const override {
    PotentialJets out = base_->jets_on(G)[i];
    for (const auto& m : members_) {
      const double s = m.sigma(t);
      if (s != 0.0) out.axpy(s, m.field->jets_on(G)[i]);
    }
    return out;
  }

  PotentialJets velocity_jets(const QuadratureGrid& G, std::size_t i, double t) const override {
    PotentialJets out;
    for (const auto& m : members_) {
      const double s = m.sigma_dot(t);
      if (s != 0.0) out.axpy(s, m.field->jets_on(G)[i]);
    }
    return out;
  }

  /// Straight segment from phi_0 = from to phi_1 = to (fields may be null
  /// for zero).
  static CombinationPath segment(const Manifold& M, const ScalarField* from,
                                 const ScalarField* to) {
    std::vector<Member> ms;
    if (from)
      ms.push_back({from, [](double t) { return 1.0 - t; }, [](double) { return -1.0; }});
    if (to) ms.push_back({to, [](double t) { return t; }, [](double) { return 1.0; }});
    return CombinationPath(M, std::move(ms));
  }

 private:
  Manifold M_;
  std::shared_ptr<BasePotentialField> base_;
  std::vector<Member> members_;
};

/// Gauss–Legendre rule in the path parameter.
struct TimeRule {
  std::vector<double> t, w;
  explicit TimeRule(int n_t) {
    if (n_t < 4) throw ConfigError("path time rule: need at least 4 nodes");
    gauss_legendre(n_t, 0.0, 1.0, t, w);
  }
};

/// The form under the time integral of the Bott–Chern transgression at one
/// (t, node): with V = (d/dt g_t) g_t^{-1} (a 0-form endomorphism) and F the
/// curvature endomorphism of g_t,
///   integrand_k = -k i (1/k!) (i/2pi)^k sum_pi sgn(pi)
///                   V^{a_1}_{a_pi(1)} F^{a_2}_{a_pi(2)} ... F^{a_k}_{a_pi(k)},
/// specialized to k = 1, 2:
///   integrand_1 = (1/2pi) Tr V,
///   integrand_2 = (i/4pi^2) [ Tr V Tr F - Tr(V F) ].
inline FormValue bc_integrand(const MetricPoint& m, const PotentialJets& vel, int k) {
  const int n = m.n;
  cd V[2][2] = {};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      cd v = 0.0;
      for (int g = 0; g < n; ++g) v += vel.g[a][g] * m.ginv[g][b];
      V[a][b] = v;
    }
  cd trV = 0.0;
  for (int a = 0; a < n; ++a) trV += V[a][a];
  if (k == 1) return FormValue::scalar(n, trV / (2.0 * M_PI));
  const CurvatureEndo E = curvature_endo(m);
  const FormValue trF = trace_form(E);
  FormValue trVF = FormValue::scalar(n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) trVF += E.F[a][b] * V[b][a];
  const cd i2pi = cd(0.0, 1.0 / (2.0 * M_PI));
  // -2i * (1/2) (i/2pi)^2 [Tr V Tr F - Tr(V F)] = (i/4pi^2) [...]
  return (trF * trV - trVF) * (cd(0.0, -1.0) * i2pi * i2pi);
}

inline FormValue bc_integrand_at(const QuadratureGrid& G, const MetricPath& path, int k,
                                 double t, std::size_t i) {
  const int n = path.dim();
  const MetricPoint m = metric_from_jets(path.total_jets(G, i, t), n);
  return bc_integrand(m, path.velocity_jets(G, i, t), k);
}

/// Bott–Chern transgression form BC_k(path) at every grid node, a
/// (k-1, k-1)-form field: BC_k = int_0^1 integrand_k dt. For k = 1 this
/// collapses to the closed form (1/2pi) log(det g_1 / det g_0).
inline std::vector<FormValue> bott_chern_field(const QuadratureGrid& G, const MetricPath& path,
                                               int k, int n_t, int threads) {
  const int n = path.dim();
  if (k < 1 || k > n) throw ConfigError("bott_chern_field: need 1 <= k <= n");
  TimeRule rule(n_t);
  std::vector<FormValue> out(G.size(), FormValue::scalar(n, 0.0));
  // parallel_reduce used for its deterministic chunked loop; each index
  // writes only its own slot.
  parallel_reduce(G.size(), threads, [&](std::size_t i) {
    FormValue acc = FormValue::scalar(n, 0.0);
    for (std::size_t it = 0; it < rule.t.size(); ++it) {
      const MetricPoint m = metric_from_jets(path.total_jets(G, i, rule.t[it]), n);
      acc += bc_integrand(m, path.velocity_jets(G, i, rule.t[it]), k) * rule.w[it];
    }
    out[i] = acc;
    return 0.0;
  });
  return out;
}

}  // namespace kenergy
