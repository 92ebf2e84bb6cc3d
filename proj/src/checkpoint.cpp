#include "mgan/checkpoint.hpp"

#include <fstream>

#include "mgan/io.hpp"

namespace mgan {

namespace {

constexpr char kMagic[8] = {'M', 'G', 'A', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_array(std::ostream& os, const RealArray& a) {
  write_u32(os, static_cast<std::uint32_t>(a.rank()));
  for (std::size_t d : a.shape()) write_u64(os, d);
  for (double v : a.values()) write_f64(os, v);
}

RealArray read_array(std::istream& is) {
  const std::uint32_t rank = read_u32(is);
  Shape shape(rank);
  for (auto& d : shape) d = read_u64(is);
  RealArray a(std::move(shape));
  for (std::size_t i = 0; i < a.numel(); ++i) a.at(i) = read_f64(is);
  return a;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParameterTree& params,
                     const OptimizerState* optimizer, const std::string& config_text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path.string());

  os.write(kMagic, sizeof(kMagic));
  write_u32(os, kVersion);
  write_string(os, config_text);

  write_u64(os, params.size());
  for (const auto& [name, entry] : params) {
    write_string(os, name);
    os.put(entry.trainable ? 1 : 0);
    write_array(os, entry.value);
  }

  os.put(optimizer ? 1 : 0);
  if (optimizer) {
    write_u64(os, optimizer->step_count);
    write_f64(os, optimizer->learning_rate);
    write_f64(os, optimizer->decay);
    write_f64(os, optimizer->epsilon);
    write_u64(os, optimizer->square_avg.size());
    for (const auto& [name, acc] : optimizer->square_avg) {
      write_string(os, name);
      write_array(os, acc);
    }
  }
  if (!os) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint " + path.string());

  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::string_view(magic, 8) != std::string_view(kMagic, 8)) {
    throw std::runtime_error(path.string() + " is not a checkpoint file");
  }
  const std::uint32_t version = read_u32(is);
  if (version != kVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }

  Checkpoint ckpt;
  ckpt.config_text = read_string(is);

  const std::uint64_t n = read_u64(is);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string name = read_string(is);
    const bool trainable = is.get() != 0;
    ckpt.params.add(name, read_array(is), trainable);
  }

  if (is.get() != 0) {
    OptimizerState opt;
    opt.step_count = read_u64(is);
    opt.learning_rate = read_f64(is);
    opt.decay = read_f64(is);
    opt.epsilon = read_f64(is);
    const std::uint64_t m = read_u64(is);
    for (std::uint64_t i = 0; i < m; ++i) {
      std::string name = read_string(is);
      opt.square_avg.emplace(std::move(name), read_array(is));
    }
    ckpt.optimizer = std::move(opt);
  }
  return ckpt;
}

void require_matching_architecture(const ParameterTree& loaded, const ParameterTree& expected) {
  auto diff = expected.structural_diff(loaded);
  if (!diff.empty()) {
    throw CheckpointMismatchError("checkpoint does not match architecture:\n" + diff.describe());
  }
}

}  // namespace mgan
