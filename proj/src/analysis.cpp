#include "mgan/analysis.hpp"

#include <array>
#include <cmath>
#include <fstream>

#include "mgan/io.hpp"

namespace mgan {

std::pair<double, std::vector<double>> power_iteration(const RealArray& sym, double tol,
                                                       std::size_t max_iter) {
  require_rank(sym, 2, "power_iteration");
  const std::size_t d = sym.rows();
  if (sym.cols() != d) throw ShapeError("power_iteration: matrix must be square");

  // Deterministic start vector; rotated if it is orthogonal to the dominant
  // eigenvector the iteration will recover it through round-off growth.
  std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(d)));
  std::vector<double> next(d);
  double lambda = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += sym.at2(i, j) * v[j];
      next[i] = acc;
    }
    double norm = 0.0;
    for (double x : next) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return {0.0, std::vector<double>(d, 0.0)};
    double diff = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      next[i] /= norm;
      diff += std::fabs(next[i] - v[i]);
    }
    v = next;
    lambda = norm;
    if (diff < tol) break;
  }
  return {lambda, v};
}

RealArray pca_project(const RealArray& vectors, RealArray* axes_out) {
  require_rank(vectors, 2, "pca_project");
  const std::size_t m = vectors.rows();
  const std::size_t d = vectors.cols();
  if (m < 2) throw std::invalid_argument("pca_project: need at least 2 rows");

  RealArray centered = vectors;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += vectors.at2(i, j);
    mean /= static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) centered.at2(i, j) -= mean;
  }

  RealArray cov({d, d});
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = centered.data() + i * d;
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = a; b < d; ++b) cov.at2(a, b) += row[a] * row[b];
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      cov.at2(a, b) /= static_cast<double>(m - 1);
      cov.at2(b, a) = cov.at2(a, b);
    }
  }

  RealArray projection({m, 2});
  if (axes_out) *axes_out = RealArray({2, d});
  RealArray deflated = cov;
  std::vector<std::vector<double>> axes;
  double lead = 0.0;
  for (std::size_t comp = 0; comp < 2 && comp < d; ++comp) {
    auto [lambda, axis] = power_iteration(deflated);
    if (comp == 0) lead = lambda;
    // Deflation residue is O(ε·λ₁); anything at that scale is no variance.
    if (lambda <= 1e-12 * std::max(lead, 1e-300)) break;
    for (const auto& prev : axes) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += prev[j] * axis[j];
      for (std::size_t j = 0; j < d; ++j) axis[j] -= dot * prev[j];
    }
    double norm = 0.0;
    for (double x : axis) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-8) break;
    for (double& x : axis) x /= norm;
    // Sign convention: largest-magnitude loading positive.
    std::size_t arg = 0;
    for (std::size_t j = 1; j < d; ++j) {
      if (std::fabs(axis[j]) > std::fabs(axis[arg])) arg = j;
    }
    if (axis[arg] < 0.0) {
      for (double& x : axis) x = -x;
    }
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += centered.at2(i, j) * axis[j];
      projection.at2(i, comp) = acc;
    }
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) deflated.at2(a, b) -= lambda * axis[a] * axis[b];
    }
    if (axes_out) {
      for (std::size_t j = 0; j < d; ++j) axes_out->at2(comp, j) = axis[j];
    }
    axes.push_back(std::move(axis));
  }
  return projection;
}

namespace {

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

AnalyzeResult run_analyze(const ParameterTree& params, const ModelSpec& model, Env& env,
                          std::uint64_t episodes, std::uint64_t seed,
                          const std::filesystem::path& out_dir) {
  if (episodes == 0) throw std::invalid_argument("run_analyze: episode count must be positive");
  std::filesystem::create_directories(out_dir);

  AnalyzeResult result;
  result.analysis_csv = out_dir / "analysis.csv";
  result.pca_csv = out_dir / "pca.csv";

  std::ofstream csv(result.analysis_csv, std::ios::binary | std::ios::trunc);
  if (!csv) throw std::runtime_error("cannot write " + result.analysis_csv.string());
  csv << "episode,t,agent,g,c,weight,hp,alive";
  for (std::size_t j = 0; j < model.emb_dim; ++j) csv << ",e" << j;
  csv << "\n";

  const std::size_t G = model.n_graphs;
  const std::size_t n = model.n_agents;
  // Pooled embeddings per graph network, in row order (episode, t, agent).
  std::vector<std::vector<double>> pooled(G);
  std::vector<std::array<std::uint64_t, 3>> row_keys;  // episode, t, agent
  std::vector<std::vector<double>> weights_per_g(G), hp_per_g(G);

  Rng rng(Rng::derive(seed, 0xa11));
  for (std::uint64_t e = 0; e < episodes; ++e) {
    Episode ep = collect_episode(env, model, params, /*epsilon=*/0.0,
                                 Rng::derive(seed, 500 + e), rng);
    result.total_steps += ep.length();
    for (std::size_t t = 0; t < ep.length(); ++t) {
      RealArray feats({n, model.obs_dim});
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t i = 0; i < model.obs_dim; ++i) feats.at2(a, i) = ep.obs[t][a].at(i);
      }
      auto outputs = model.analyze_step(params, feats, ep.alive[t]);
      // liveness stands in for HP when the env has no HP notion
      std::vector<double> hp(n);
      for (std::size_t a = 0; a < n; ++a) {
        hp[a] = ep.agent_hp[t].size() == n ? ep.agent_hp[t][a] : (ep.alive[t][a] ? 1.0 : 0.0);
      }
      for (std::size_t g = 0; g < G; ++g) {
        for (std::size_t a = 0; a < n; ++a) {
          csv << e << "," << t << "," << a << "," << g << ","
              << format_double(outputs.scalars[g].at(a)) << ","
              << format_double(outputs.weights[g].at(a)) << "," << format_double(hp[a]) << ","
              << (ep.alive[t][a] ? 1 : 0);
          for (std::size_t j = 0; j < model.emb_dim; ++j) {
            csv << "," << format_double(outputs.embeddings[g].at2(a, j));
          }
          csv << "\n";
          ++result.rows;
          pooled[g].insert(pooled[g].end(), outputs.embeddings[g].data() + a * model.emb_dim,
                           outputs.embeddings[g].data() + (a + 1) * model.emb_dim);
          if (g == 0) row_keys.push_back({e, t, a});
          weights_per_g[g].push_back(outputs.weights[g].at(a));
          hp_per_g[g].push_back(hp[a]);
        }
      }
    }
  }

  std::ofstream pca(result.pca_csv, std::ios::binary | std::ios::trunc);
  if (!pca) throw std::runtime_error("cannot write " + result.pca_csv.string());
  pca << "episode,t,agent,g,pc1,pc2\n";
  for (std::size_t g = 0; g < G; ++g) {
    const std::size_t rows = pooled[g].size() / model.emb_dim;
    if (rows < 2) continue;
    RealArray mat({rows, model.emb_dim}, std::move(pooled[g]));
    RealArray proj = pca_project(mat);
    for (std::size_t r = 0; r < rows; ++r) {
      pca << row_keys[r][0] << "," << row_keys[r][1] << "," << row_keys[r][2] << "," << g << ","
          << format_double(proj.at2(r, 0)) << "," << format_double(proj.at2(r, 1)) << "\n";
    }
  }

  for (std::size_t g = 0; g < G; ++g) {
    result.weight_hp_correlation.push_back(pearson(weights_per_g[g], hp_per_g[g]));
  }
  return result;
}

}  // namespace mgan
