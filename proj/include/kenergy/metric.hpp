#pragma once

#include "kenergy/jets.hpp"
#include "kenergy/manifold.hpp"
#include "kenergy/util.hpp"

namespace kenergy {

/// Pointwise Kaehler metric data assembled from the 4-jet of a potential:
/// g_{i jbar} and its first/second derivatives, the inverse, the determinant,
/// and the full curvature tensor R_{a bbar i jbar} of the Chern connection on
/// T^{1,0} in metric index placement.
struct MetricPoint {
  int n = 1;
  cd g[2][2]{};
  cd ginv[2][2]{};  // ginv[i][j] = g^{ibar j}  (so sum_j g[k][j]*ginv[j][i] = delta_ki)
  double det_g = 0.0;
  double min_eig = 0.0;
  cd dg[2][2][2]{};   // d_k g_{i jbar}
  cd dgb[2][2][2]{};  // dbar_k g_{i jbar}
  cd R[2][2][2][2]{};  // R[a][b][i][j] = R_{a bbar i jbar}
};

/// Hermitian 2x2 (or 1x1) smallest eigenvalue, closed form.
inline double hermitian_min_eig(const cd m[2][2], int n) {
  if (n == 1) return m[0][0].real();
  const double a = m[0][0].real(), d = m[1][1].real();
  const double off = std::abs(m[0][1]);
  const double tr = a + d;
  const double disc = std::sqrt(std::max(0.0, 0.25 * (a - d) * (a - d) + off * off));
  return 0.5 * tr - disc;
}

/// Assemble the metric point from the jets of the *total* potential
/// (reference potential plus perturbation). Throws AdmissibilityError if the
/// metric fails to be positive definite at this point.
inline MetricPoint metric_from_jets(const PotentialJets& pj, int n, bool require_positive = true) {
  MetricPoint m;
  m.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      m.g[i][j] = pj.g[i][j];
      for (int k = 0; k < n; ++k) {
        m.dg[k][i][j] = pj.dg[k][i][j];
        m.dgb[k][i][j] = pj.dgb[k][i][j];
      }
    }
  if (n == 1) {
    m.det_g = m.g[0][0].real();
    m.min_eig = m.det_g;
    if (m.det_g > 0.0) m.ginv[0][0] = 1.0 / m.det_g;
  } else {
    const cd det = m.g[0][0] * m.g[1][1] - m.g[0][1] * m.g[1][0];
    m.det_g = det.real();
    m.min_eig = hermitian_min_eig(m.g, 2);
    if (m.min_eig > 0.0) {
      const cd idet = 1.0 / det;
      m.ginv[0][0] = m.g[1][1] * idet;
      m.ginv[1][1] = m.g[0][0] * idet;
      m.ginv[0][1] = -m.g[0][1] * idet;
      m.ginv[1][0] = -m.g[1][0] * idet;
    }
  }
  if (m.min_eig <= 0.0) {
    if (require_positive)
      throw AdmissibilityError("metric not positive definite (min eigenvalue " +
                               std::to_string(m.min_eig) + ")");
    return m;
  }

  // R_{a bbar i jbar} = -d_i dbar_j g_{a bbar}
  //                     + sum_{l,m} g^{mbar l} (d_i g_{a mbar}) (dbar_j g_{l bbar}).
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          cd r = -pj.ddg[i][j][a][b];
          for (int l = 0; l < n; ++l)
            for (int mu = 0; mu < n; ++mu)
              r += m.ginv[mu][l] * pj.dg[i][a][mu] * pj.dgb[j][l][b];
          m.R[a][b][i][j] = r;
        }
  return m;
}

}  // namespace kenergy
