#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "mgan/params.hpp"
#include "mgan/rng.hpp"

namespace mgan::test {

// Central finite differences of f over one scalar inside `params`, with f
// evaluating the full forward pass from scratch. This is the independent
// gradient oracle; it never touches the tape machinery.
inline double central_difference(ParameterTree& params, const std::string& name, std::size_t i,
                                 const std::function<double()>& f, double eps = 1e-5) {
  double& slot = params.at(name).at(i);
  const double saved = slot;
  slot = saved + eps;
  const double hi = f();
  slot = saved - eps;
  const double lo = f();
  slot = saved;
  return (hi - lo) / (2.0 * eps);
}

inline double rel_err(double a, double b, double floor = 1e-3) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), floor});
}

inline RealArray random_array(Rng& rng, Shape shape, double scale = 1.0) {
  RealArray a(std::move(shape));
  for (std::size_t i = 0; i < a.numel(); ++i) a.at(i) = rng.uniform(-scale, scale);
  return a;
}

// Jacobi eigendecomposition for small symmetric matrices; the independent
// oracle PCA is checked against. Returns eigenvalues (descending) and the
// matching eigenvectors as rows.
inline std::pair<std::vector<double>, std::vector<std::vector<double>>> jacobi_eigen(
    std::vector<std::vector<double>> m) {
  const std::size_t d = m.size();
  std::vector<std::vector<double>> v(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) v[i][i] = 1.0;

  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) off += m[p][q] * m[p][q];
    }
    if (off < 1e-26) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        if (std::fabs(m[p][q]) < 1e-300) continue;
        const double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double mkp = m[k][p], mkq = m[k][q];
          m[k][p] = c * mkp - s * mkq;
          m[k][q] = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double mpk = m[p][k], mqk = m[q][k];
          m[p][k] = c * mpk - s * mqk;
          m[q][k] = s * mpk + c * mqk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(d);
  for (std::size_t i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return m[a][a] > m[b][b]; });
  std::vector<double> evals(d);
  std::vector<std::vector<double>> evecs(d, std::vector<double>(d));
  for (std::size_t r = 0; r < d; ++r) {
    evals[r] = m[order[r]][order[r]];
    for (std::size_t k = 0; k < d; ++k) evecs[r][k] = v[k][order[r]];
  }
  return {evals, evecs};
}

}  // namespace mgan::test
