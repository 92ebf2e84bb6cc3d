#pragma once

#include <filesystem>

#include "mgan/learner.hpp"

namespace mgan {

// Projects rows onto the top-2 principal components of their covariance
// (power iteration with deflation, tolerance 1e-10). The data is centred
// first; each component's sign is fixed by making its largest-magnitude
// loading positive. All-zero variance yields an all-zero projection.
// `axes_out`, when given, receives the two component axes as rows [2×d]
// (zero rows for missing components).
RealArray pca_project(const RealArray& vectors, RealArray* axes_out = nullptr);

// Largest eigenpair of a symmetric matrix by power iteration; exposed for
// reuse and testing.
std::pair<double, std::vector<double>> power_iteration(const RealArray& sym, double tol = 1e-10,
                                                       std::size_t max_iter = 100'000);

struct AnalyzeResult {
  std::size_t rows = 0;          // analysis.csv data rows
  std::size_t total_steps = 0;   // env steps across the rolled episodes
  std::filesystem::path analysis_csv;
  std::filesystem::path pca_csv;
  // Pearson correlation between credit weight and agent HP per graph
  // network; NaN when degenerate (e.g. constant HP).
  std::vector<double> weight_hp_correlation;
};

// Rolls greedy episodes and writes analysis.csv (one row per step, agent and
// graph network: scalar, credit weight, HP, alive flag, embedding) plus
// pca.csv (2-D projection of each graph network's pooled embeddings).
AnalyzeResult run_analyze(const ParameterTree& params, const ModelSpec& model, Env& env,
                          std::uint64_t episodes, std::uint64_t seed,
                          const std::filesystem::path& out_dir);

}  // namespace mgan
