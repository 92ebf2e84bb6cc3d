#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "mgan/optim.hpp"
#include "mgan/params.hpp"

namespace mgan {

// Raised when a checkpoint does not line up with the architecture it is
// loaded against; message carries the structural diff.
struct CheckpointMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Self-describing binary container: versioned header, the resolved run
// config that produced it, every parameter (name, shape, little-endian f64
// data, trainable flag) and optionally the optimizer state.
struct Checkpoint {
  ParameterTree params;
  std::optional<OptimizerState> optimizer;
  std::string config_text;
};

void save_checkpoint(const std::filesystem::path& path, const ParameterTree& params,
                     const OptimizerState* optimizer, const std::string& config_text);

Checkpoint load_checkpoint(const std::filesystem::path& path);

// Throws CheckpointMismatchError with the full diff when the loaded tree
// does not structurally match `expected`.
void require_matching_architecture(const ParameterTree& loaded, const ParameterTree& expected);

}  // namespace mgan
