#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "kenergy/chern.hpp"

namespace kenergy {

/// Normalized k-th Chern mean: mu_k = (int c_k ^ omega^{n-k}) / (int omega^n)
/// for the metric of `base` (the reference metric when base is null).
/// Computed on the same quadrature used downstream so discrete identities
/// (translation invariance of the energies, vanishing constant gradient
/// direction) hold to round-off rather than quadrature error.
inline double mu_k(const Manifold& M, const QuadratureGrid& G, int k, int threads,
                   const ScalarField* base = nullptr) {
  if (k < 1 || k > M.n) throw ConfigError("mu_k: need 1 <= k <= n");
  double vol = 0.0;
  auto metric_at = [&](std::size_t i) {
    Jet K = M.base_potential(G.nodes[i]);
    if (base) K += base->jet(G.nodes[i]);
    return metric_from_jets(extract_potential_jets(K), M.n);
  };
  const double num = integrate_top(G, threads, [&](std::size_t i) {
    MetricPoint m = metric_at(i);
    return wedge(chern_form(m, k), wedge_pow(omega_form(m), M.n - k));
  });
  vol = integrate_top(G, threads,
                      [&](std::size_t i) { return wedge_pow(omega_form(metric_at(i)), M.n); });
  return num / vol;
}

/// Higher K-energy along an explicit path of potentials,
///   M_k = -(n-k+1) int_0^1 int_M phidot_t (c_k(t) - mu_k omega_t^k)
///                                 ^ omega_t^{n-k}  dt,
/// evaluated for several k in one sweep (the metric and curvature work per
/// (t, node) dominates and is shared).
inline std::vector<double> k_energy_path_multi(const Manifold& M, const QuadratureGrid& G,
                                               const MetricPath& path, std::vector<int> ks,
                                               const std::vector<double>& mus, int n_t,
                                               int threads) {
  if (ks.size() != mus.size()) throw ConfigError("k_energy_path_multi: ks/mus size mismatch");
  for (int k : ks)
    if (k < 1 || k > M.n) throw ConfigError("k_energy_path_multi: need 1 <= k <= n");
  TimeRule rule(n_t);
  std::vector<double> total(ks.size(), 0.0);
  for (std::size_t it = 0; it < rule.t.size(); ++it) {
    const double t = rule.t[it];
    for (std::size_t kk = 0; kk < ks.size(); ++kk) {
      // one pass per k keeps integrate_top's determinism contract simple;
      // the shared work is the cached member jets inside the path
      const int k = ks[kk];
      const double inner = integrate_top(G, threads, [&](std::size_t i) {
        const MetricPoint m = metric_from_jets(path.total_jets(G, i, t), M.n);
        const PotentialJets vel = path.velocity_jets(G, i, t);
        const FormValue omega = omega_form(m);
        const FormValue defect =
            chern_form(m, k) - wedge_pow(omega, k) * cd(mus[kk]);
        return wedge(defect, wedge_pow(omega, M.n - k)) * vel.v;
      });
      total[kk] += rule.w[it] * inner;
    }
  }
  for (std::size_t kk = 0; kk < ks.size(); ++kk) total[kk] *= -(M.n - ks[kk] + 1.0);
  return total;
}

inline double k_energy_path(const Manifold& M, const QuadratureGrid& G, const MetricPath& path,
                            int k, double mu, int n_t, int threads) {
  return k_energy_path_multi(M, G, path, {k}, {mu}, n_t, threads)[0];
}

/// Derivative of the path K-energy with respect to the path parameter at a
/// fixed time: the inner integral of the path formula,
///   d M_k / dt = -(n-k+1) int_M phidot_t (c_k(t) - mu omega_t^k) ^ omega_t^{n-k}.
inline double k_energy_time_derivative(const Manifold& M, const QuadratureGrid& G,
                                       const MetricPath& path, int k, double mu, double t,
                                       int threads) {
  if (k < 1 || k > M.n) throw ConfigError("k_energy_time_derivative: need 1 <= k <= n");
  const double inner = integrate_top(G, threads, [&](std::size_t i) {
    const MetricPoint m = metric_from_jets(path.total_jets(G, i, t), M.n);
    const PotentialJets vel = path.velocity_jets(G, i, t);
    const FormValue omega = omega_form(m);
    const FormValue defect = chern_form(m, k) - wedge_pow(omega, k) * cd(mu);
    return wedge(defect, wedge_pow(omega, M.n - k)) * vel.v;
  });
  return -(M.n - k + 1.0) * inner;
}

/// Which endpoint anchors the no-path energy formula.
enum class NoPathVariant {
  BaseChern,     // BC_k ^ omega_phi^{n-k+1} and c_k of the *reference* metric
  EndpointChern  // BC_k ^ omega^{n-k+1}     and c_k of the *endpoint* metric
};

/// No-path evaluation of the higher K-energy:
///   M_k(phi) = int BC_k(phi) ^ omega_?^{n-k+1}
///            - int phi [ c_k(?) ^ sum_{i=0}^{n-k} omega^i omega_phi^{n-k-i}
///                        - (n-k+1)/(n+1) mu_k sum_{i=0}^{n} omega^i omega_phi^{n-i} ],
/// where "?" is the variant: BaseChern pairs BC_k with omega_phi and uses
/// c_k(reference); EndpointChern pairs BC_k with omega and uses c_k(phi).
/// Both agree with the path integral; they differ only in which transgression
/// identity was applied.
inline double k_energy_nopath(const Manifold& M, const QuadratureGrid& G,
                              const ScalarField& phi, int k, double mu, int n_t, int threads,
                              NoPathVariant variant,
                              const ScalarField* base_shift = nullptr) {
  std::vector<CombinationPath::Member> members;
  members.push_back({&phi, [](double t) { return t; }, [](double) { return 1.0; }});
  CombinationPath path(M, std::move(members), base_shift);
  auto bc = bott_chern_field(G, path, k, n_t, threads);
  const auto& phi_jets = phi.jets_on(G);

  return integrate_top(G, threads, [&](std::size_t i) {
    const MetricPoint m0 = metric_from_jets(path.total_jets(G, i, 0.0), M.n);
    const MetricPoint m1 = metric_from_jets(path.total_jets(G, i, 1.0), M.n);
    const FormValue w0 = omega_form(m0), w1 = omega_form(m1);
    const bool base_variant = variant == NoPathVariant::BaseChern;
    FormValue term1 = wedge(bc[i], wedge_pow(base_variant ? w1 : w0, M.n - k + 1));
    const FormValue ck = chern_form(base_variant ? m0 : m1, k);
    FormValue bracket = wedge(ck, sum_mixed_powers(w0, w1, M.n - k)) -
                        sum_mixed_powers(w0, w1, M.n) *
                            cd(mu * (M.n - k + 1.0) / (M.n + 1.0));
    return term1 - bracket * phi_jets[i].v;
  });
}

/// Cocycle residual for a pair (phi, psi):
///   M_k^{omega}(phi) - M_k^{omega}(psi) - M_k^{omega_psi}(phi - psi),
/// each term a path integral with the indicated reference metric.
inline double cocycle_residual(const Manifold& M, const QuadratureGrid& G,
                               const ScalarField& phi, const ScalarField& psi, int k, int n_t,
                               int threads) {
  const double mu0 = mu_k(M, G, k, threads);
  const double mu_psi = mu_k(M, G, k, threads, &psi);

  CombinationPath to_phi = CombinationPath::segment(M, nullptr, &phi);
  CombinationPath to_psi = CombinationPath::segment(M, nullptr, &psi);
  // path from 0 to (phi - psi) over the shifted reference omega_psi
  std::vector<CombinationPath::Member> ms;
  ms.push_back({&phi, [](double t) { return t; }, [](double) { return 1.0; }});
  ms.push_back({&psi, [](double t) { return -t; }, [](double) { return -1.0; }});
  CombinationPath shifted(M, std::move(ms), &psi);

  const double a = k_energy_path(M, G, to_phi, k, mu0, n_t, threads);
  const double b = k_energy_path(M, G, to_psi, k, mu0, n_t, threads);
  const double c = k_energy_path(M, G, shifted, k, mu_psi, n_t, threads);
  return a - b - c;
}

/// The fixed-time vanishing identity: at every t along a path,
///   int_M [BC_k integrand at t] ^ omega_t^{n-k+1} = 0
/// (for k = 1 this is int Laplacian(phidot) omega_t^n = 0; for k = 2 it uses
/// the Bianchi symmetry of the curvature). Returns the integral at time t.
inline double fixed_time_identity(const Manifold& M, const QuadratureGrid& G,
                                  const MetricPath& path, int k, double t, int threads) {
  return integrate_top(G, threads, [&](std::size_t i) {
    const MetricPoint m = metric_from_jets(path.total_jets(G, i, t), M.n);
    const FormValue integrand = bc_integrand(m, path.velocity_jets(G, i, t), k);
    return wedge(integrand, wedge_pow(omega_form(m), M.n - k + 1));
  });
}

/// L2 norm (against omega_phi^n / V) of the Euler–Lagrange density
///   D = [(c_k - mu_k omega_phi^k) ^ omega_phi^{n-k}] / omega_phi^n.
inline double critical_residual(const Manifold& M, const QuadratureGrid& G,
                                const ScalarField* phi, int k, double mu, int threads) {
  double vol = 0.0;
  auto metric_at = [&](std::size_t i) {
    Jet K = M.base_potential(G.nodes[i]);
    if (phi) K += phi->jet(G.nodes[i]);
    return metric_from_jets(extract_potential_jets(K), M.n);
  };
  vol = integrate_top(G, threads,
                      [&](std::size_t i) { return wedge_pow(omega_form(metric_at(i)), M.n); });
  const double l2 = integrate_density(G, threads, [&](std::size_t i) {
    const MetricPoint m = metric_at(i);
    const FormValue omega = omega_form(m);
    const double top = top_density(wedge_pow(omega, M.n));
    const FormValue defect = chern_form(m, k) - wedge_pow(omega, k) * cd(mu);
    const double D = top_density(wedge(defect, wedge_pow(omega, M.n - k))) / top;
    return D * D * top;
  });
  return std::sqrt(l2 / vol);
}

/// Analytic gradient of M_k over a coefficient family phi = sum_j c_j psi_j:
///   dM/dc_j = -(n-k+1) int psi_j (c_k(phi) - mu_k omega_phi^k) ^ omega_phi^{n-k}.
inline std::vector<double> k_energy_gradient(const Manifold& M, const QuadratureGrid& G,
                                             const std::vector<const ScalarField*>& basis,
                                             const std::vector<double>& coeff, int k, double mu,
                                             int threads) {
  std::vector<const std::vector<PotentialJets>*> tables;
  tables.reserve(basis.size());
  for (const auto* f : basis) tables.push_back(&f->jets_on(G));
  BasePotentialField base(M);
  const auto& base_jets = base.jets_on(G);
  // One metric/curvature pass for the defect density, then cheap inner
  // products against the cached member values.
  std::vector<double> defect_top(G.size(), 0.0);
  parallel_reduce(G.size(), threads, [&](std::size_t i) {
    PotentialJets tot = base_jets[i];
    for (std::size_t l = 0; l < basis.size(); ++l) tot.axpy(coeff[l], (*tables[l])[i]);
    const MetricPoint m = metric_from_jets(tot, M.n);
    const FormValue omega = omega_form(m);
    const FormValue defect = chern_form(m, k) - wedge_pow(omega, k) * cd(mu);
    defect_top[i] = top_density(wedge(defect, wedge_pow(omega, M.n - k)));
    return 0.0;
  });
  std::vector<double> grad(basis.size(), 0.0);
  for (std::size_t j = 0; j < basis.size(); ++j) {
    Accum acc;
    for (std::size_t i = 0; i < G.size(); ++i)
      acc.add(G.weights[i] * defect_top[i] * (*tables[j])[i].v.real());
    grad[j] = -(M.n - k + 1.0) * acc.total();
  }
  return grad;
}

struct DescentOptions {
  int k = 1;
  int max_steps = 200;
  double step0 = 1.0;        // initial line-search step (1.0 = full Newton step)
  double armijo = 1e-4;      // sufficient-decrease constant
  double shrink = 0.5;       // backtracking factor (also used on admissibility failures)
  double target_residual = 1e-4;
  double grad_tol = 1e-12;
  int n_t = 12;
};

struct DescentStep {
  int step = 0;
  std::vector<double> coeff;
  double energy = 0.0;
  double residual = 0.0;
  double step_size = 0.0;
  bool accepted = true;
};

struct DescentResult {
  std::vector<DescentStep> trajectory;
  std::vector<double> coeff;
  bool converged = false;
  std::string message;
};

/// Gradient descent on M_k over the coefficient space of a potential family,
/// Armijo backtracking line search; a step that leaves the Kaehler cone
/// (AdmissibilityError) is treated as a failed probe and the step shrinks.
inline DescentResult descend(const Manifold& M, const QuadratureGrid& G,
                             const std::vector<const ScalarField*>& basis,
                             std::vector<double> coeff, const DescentOptions& opt, int threads) {
  DescentResult res;
  const double mu = mu_k(M, G, opt.k, threads);

  auto make_field = [&](const std::vector<double>& c) {
    std::vector<std::pair<double, const ScalarField*>> parts;
    for (std::size_t j = 0; j < basis.size(); ++j) parts.emplace_back(c[j], basis[j]);
    return LinearCombination(M.n, std::move(parts));
  };
  auto energy_of = [&](const std::vector<double>& c) {
    LinearCombination f = make_field(c);
    return k_energy_nopath(M, G, f, opt.k, mu, opt.n_t, threads, NoPathVariant::BaseChern);
  };
  auto residual_of = [&](const std::vector<double>& c) {
    LinearCombination f = make_field(c);
    return critical_residual(M, G, &f, opt.k, mu, threads);
  };

  auto grad_of = [&](const std::vector<double>& c) {
    return k_energy_gradient(M, G, basis, c, opt.k, mu, threads);
  };
  const int dim = static_cast<int>(basis.size());

  double E = energy_of(coeff);
  for (int it = 0; it < opt.max_steps; ++it) {
    const std::vector<double> grad = grad_of(coeff);
    Eigen::VectorXd g(dim);
    for (int j = 0; j < dim; ++j) g(j) = grad[j];
    const double resid = residual_of(coeff);
    res.trajectory.push_back({it, coeff, E, resid, 0.0, true});
    if (resid <= opt.target_residual) {
      res.converged = true;
      res.message = "residual target reached";
      break;
    }
    if (g.squaredNorm() <= opt.grad_tol * opt.grad_tol) {
      res.converged = resid <= opt.target_residual;
      res.message = "gradient vanished";
      break;
    }

    // Damped-Newton direction. The energy along automorphism-orbit
    // directions of the reference metric is polynomially flat, and plain
    // steepest descent crawls there; a Newton step with a finite-difference
    // Hessian of the analytic gradient traverses the flat valley in a few
    // iterations. Levenberg damping is escalated until the solve yields a
    // genuine descent direction (covers indefinite Hessians far from the
    // minimum), with raw steepest descent as the final fallback.
    Eigen::VectorXd dir = -g;
    try {
      Eigen::MatrixXd H(dim, dim);
      for (int l = 0; l < dim; ++l) {
        const double h = 1e-5 * std::max(1.0, std::abs(coeff[l]));
        auto cp = coeff, cm = coeff;
        cp[l] += h;
        cm[l] -= h;
        const auto gp = grad_of(cp), gm = grad_of(cm);
        for (int j = 0; j < dim; ++j) H(j, l) = (gp[j] - gm[j]) / (2.0 * h);
      }
      H = 0.5 * (H + H.transpose()).eval();
      double lambda = 0.0;
      const double scale = H.diagonal().cwiseAbs().maxCoeff() + 1e-300;
      for (int attempt = 0; attempt < 10; ++attempt) {
        Eigen::MatrixXd Hl = H + lambda * Eigen::MatrixXd::Identity(dim, dim);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(Hl);
        if (ldlt.info() == Eigen::Success) {
          Eigen::VectorXd cand = ldlt.solve(-g);
          if (cand.allFinite() && cand.dot(g) < 0.0) {
            dir = cand;
            break;
          }
        }
        lambda = (lambda == 0.0) ? 1e-8 * scale : 10.0 * lambda;
      }
    } catch (const AdmissibilityError&) {
      // Hessian probe left the admissible cone: keep the steepest direction.
    }

    const double slope = dir.dot(g);  // < 0
    bool moved = false;
    double t = opt.step0;
    while (t > 1e-14) {
      std::vector<double> trial(coeff);
      for (int j = 0; j < dim; ++j) trial[j] += t * dir(j);
      try {
        const double Et = energy_of(trial);
        if (Et <= E + opt.armijo * t * slope) {
          coeff = std::move(trial);
          E = Et;
          if (!res.trajectory.empty()) res.trajectory.back().step_size = t;
          moved = true;
          break;
        }
      } catch (const AdmissibilityError&) {
        // fell out of the cone: treat like a failed decrease probe
      }
      t *= opt.shrink;
    }
    if (!moved) {
      res.message = "line search stalled";
      break;
    }
  }
  if (res.message.empty()) res.message = "step budget exhausted";
  res.coeff = coeff;
  if (!res.trajectory.empty() && res.trajectory.back().coeff != coeff) {
    const double resid = residual_of(coeff);
    res.trajectory.push_back({static_cast<int>(res.trajectory.size()), coeff, E, resid,
                              0.0, true});
    if (resid <= opt.target_residual) res.converged = true;
  }
  return res;
}

}  // namespace kenergy
