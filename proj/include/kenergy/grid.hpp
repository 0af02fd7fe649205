#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <vector>

#include "kenergy/manifold.hpp"
#include "kenergy/metric.hpp"
#include "kenergy/util.hpp"

namespace kenergy {

struct Resolution {
  int radial = 32;   // Gauss–Legendre order in the radial direction (torus: grid side)
  int angular = 32;  // angular sample counts (trapezoid / GL, see build_grid)
};

/// Quadrature rule over the manifold. Each node carries the chart it is
/// evaluated in; its weight is for plain Lebesgue measure on that chart's
/// coordinates, so \int f dV ~= sum_i w_i f(node_i) once the integrand
/// includes the volume-form density (2^n n! det g for omega^n) in the same
/// chart.
///
/// cp1 : z = tan(rho/2) e^{i theta}, GL in rho on (0, pi), trapezoid in
///       theta. Nodes with rho > pi/2 are stored in chart 1 (w = 1/z), where
///       the coordinate modulus is cot(rho/2) < 1.
/// cp2 : z1 = tan(rho/2) cos(a) e^{i t1}, z2 = tan(rho/2) sin(a) e^{i t2},
///       GL in rho on (0, pi) and a on (0, pi/2), trapezoid in t1, t2
///       (angular = trapezoid count; GL order in a is angular as well).
///       Nodes with rho > pi/2 are stored in chart 1 (a <= pi/4, z1
///       dominates) or chart 2 (a > pi/4), keeping every coordinate modulus
///       <= sqrt(2).
/// torus: uniform m x m grid on the unit square (exact for the Fourier
///       families up to the Nyquist mode).
///
/// The tan(rho/2) substitution compactifies the chart: smooth global forms
/// pull back to analytic integrands in rho, so the GL error is spectral. The
/// per-node chart choice does not touch the quadrature itself -- it is an
/// exact pointwise change of coordinates (weights carry the Jacobian of that
/// chart's coordinates), done so 4-jets are never taken at huge |z| where
/// cancellation would eat the low-order digits.
struct QuadratureGrid {
  Manifold manifold;
  Resolution res;
  bool radial_reduced = false;  // 1-D rotation-invariant fast path
  std::vector<ChartPoint> nodes;
  std::vector<double> weights;
  std::uint64_t uid = 0;  // identity key for per-field jet caches

  std::size_t size() const { return nodes.size(); }
};

namespace detail {
inline std::uint64_t next_grid_uid() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}
}  // namespace detail

/// Density of omega_base^n against Lebesgue measure of the node's own chart
/// (the Fubini-Study expression takes the same form in every chart).
inline double base_volume_density(const Manifold& M, const ChartPoint& p) {
  if (!M.projective) return 2.0;  // flat metric, 2^n n! det g with n=1, g=1
  double s = 0.0;
  for (int i = 0; i < M.n; ++i) s += std::norm(p.z[i]);
  // det g_FS = (1+s)^{-(n+1)}; 2^n n! = 2 (n=1), 8 (n=2)
  const double det = std::pow(1.0 + s, -(M.n + 1));
  return (M.n == 1 ? 2.0 : 8.0) * det;
}

inline QuadratureGrid build_grid(const Manifold& M, Resolution res, bool radial_reduced = false) {
  QuadratureGrid G;
  G.manifold = M;
  G.res = res;
  G.radial_reduced = radial_reduced;
  G.uid = detail::next_grid_uid();

  auto push = [&](int chart, cd z1, cd z2, double w) {
    ChartPoint p;
    p.chart = chart;
    p.z[0] = z1;
    p.z[1] = z2;
    G.nodes.push_back(p);
    G.weights.push_back(w);
  };

  switch (M.kind) {
    case ManifoldKind::CP1: {
      if (res.radial < 8) throw GridError("cp1 grid: radial resolution must be >= 8");
      if (!radial_reduced && res.angular < 8)
        throw GridError("cp1 grid: angular resolution must be >= 8");
      std::vector<double> xr, wr;
      gauss_legendre(res.radial, 0.0, M_PI, xr, wr);
      // Nodes past rho = pi/2 live in chart 1; the coordinate modulus there
      // is cot(rho/2) = tan((pi - rho)/2), so the Jacobian r dr/drho takes
      // the same form 0.5 r (1 + r^2) in either chart.
      for (int i = 0; i < res.radial; ++i) {
        const bool far = xr[i] > 0.5 * M_PI;
        const int chart = far ? 1 : 0;
        const double r = std::tan(0.5 * (far ? M_PI - xr[i] : xr[i]));
        const double jac = 0.5 * r * (1.0 + r * r);
        if (radial_reduced) {
          push(chart, r, 0.0, 2.0 * M_PI * wr[i] * jac);
        } else {
          const int nt = res.angular;
          for (int j = 0; j < nt; ++j) {
            const double th = 2.0 * M_PI * j / nt;
            const cd dir(std::cos(th), std::sin(th));
            // w = 1/z flips the argument's sign
            push(chart, r * (far ? std::conj(dir) : dir), 0.0, wr[i] * jac * (2.0 * M_PI / nt));
          }
        }
      }
      break;
    }
    case ManifoldKind::CP2: {
      if (res.radial < 8) throw GridError("cp2 grid: radial resolution must be >= 8");
      std::vector<double> xr, wr;
      gauss_legendre(res.radial, 0.0, M_PI, xr, wr);
      if (radial_reduced) {
        // Rotation-invariant integrands only: S^3 orbit collapsed, Vol(S^3) = 2 pi^2.
        for (int i = 0; i < res.radial; ++i) {
          const bool far = xr[i] > 0.5 * M_PI;
          const double r = std::tan(0.5 * (far ? M_PI - xr[i] : xr[i]));
          // Near shells: representative (t, 0), Jacobian r^3 dr/drho. Far
          // shells: representative (1/t, 0) in chart 1; the chart change
          // multiplies the density by |d(chart1)/d(chart0)|^2 = t^6, which
          // turns r^3 (1 + r^2)/2 into r (1 + r^2)/2 at r = 1/t.
          const double jac = far ? 0.5 * r * (1.0 + r * r) : 0.5 * r * r * r * (1.0 + r * r);
          push(far ? 1 : 0, r, 0.0, 2.0 * M_PI * M_PI * wr[i] * jac);
        }
      } else {
        if (res.angular < 6) throw GridError("cp2 grid: angular resolution must be >= 6");
        std::vector<double> xa, wa;
        gauss_legendre(res.angular, 0.0, 0.5 * M_PI, xa, wa);
        const int nt = res.angular;
        for (int i = 0; i < res.radial; ++i) {
          const bool far = xr[i] > 0.5 * M_PI;
          const double r = std::tan(0.5 * (far ? M_PI - xr[i] : xr[i]));  // t near, 1/t far
          for (int a = 0; a < res.angular; ++a) {
            const double ca = std::cos(xa[a]), sa = std::sin(xa[a]);
            int chart = 0;
            double jac = 0.0;
            if (!far) {
              // (|z1|, |z2|) = t (cos a, sin a); Jacobian of (z1, z2) against
              // (rho, a, t1, t2) = r^3 (1 + r^2)/2 cos(a) sin(a).
              jac = 0.5 * r * r * r * (1.0 + r * r) * ca * sa;
            } else if (xa[a] <= 0.25 * M_PI) {
              // z1 dominates: chart 1, coords (1/z1, z2/z1), moduli
              // (r/cos a, tan a) <= (sqrt 2, 1). Chart-0 Jacobian times the
              // density factor |det d(chart1)/d(chart0)|^2 = |z1|^{-6}.
              chart = 1;
              jac = 0.5 * r * (1.0 + r * r) * sa / std::pow(ca, 5);
            } else {
              chart = 2;  // z2 dominates: coords (1/z2, z1/z2)
              jac = 0.5 * r * (1.0 + r * r) * ca / std::pow(sa, 5);
            }
            for (int j1 = 0; j1 < nt; ++j1)
              for (int j2 = 0; j2 < nt; ++j2) {
                const double t1 = 2.0 * M_PI * j1 / nt, t2 = 2.0 * M_PI * j2 / nt;
                const cd e1(std::cos(t1), std::sin(t1));
                const cd e2(std::cos(t2), std::sin(t2));
                cd c1, c2;
                if (chart == 0) {
                  c1 = r * ca * e1;
                  c2 = r * sa * e2;
                } else if (chart == 1) {
                  c1 = (r / ca) * std::conj(e1);
                  c2 = (sa / ca) * e2 * std::conj(e1);
                } else {
                  c1 = (r / sa) * std::conj(e2);
                  c2 = (ca / sa) * e1 * std::conj(e2);
                }
                push(chart, c1, c2, wr[i] * wa[a] * jac * (2.0 * M_PI / nt) * (2.0 * M_PI / nt));
              }
          }
        }
      }
      break;
    }
    case ManifoldKind::Torus: {
      const int m = res.radial;
      if (m < 8) throw GridError("torus grid: resolution must be >= 8");
      if (radial_reduced) throw GridError("torus grid has no radial-reduced variant");
      const double w = 1.0 / (m * m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) push(0, cd(double(i) / m, double(j) / m), 0.0, w);
      break;
    }
  }

  // Self-check: the rule must reproduce \int omega_base^n (analytic volume).
  Accum vol;
  for (std::size_t i = 0; i < G.size(); ++i)
    vol.add(G.weights[i] * base_volume_density(M, G.nodes[i]));
  const double rel = std::abs(vol.total() - M.volume) / M.volume;
  if (rel > 1e-8)
    throw GridError("grid volume self-check failed: relative error " + std::to_string(rel));
  return G;
}

/// Deterministic integral of a pointwise density (already multiplied by any
/// volume-form factors) against the chart weights. NaN anywhere is an error.
inline double integrate_density(const QuadratureGrid& G, int threads,
                                const std::function<double(std::size_t)>& density) {
  return parallel_reduce(G.size(), threads, [&](std::size_t i) {
    const double d = density(i);
    if (!std::isfinite(d)) throw NumericsError("non-finite integrand at grid node");
    return G.weights[i] * d;
  });
}

}  // namespace kenergy
