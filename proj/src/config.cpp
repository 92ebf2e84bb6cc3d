#include "mgan/config.hpp"

#include <charconv>
#include <sstream>

#include "mgan/io.hpp"

namespace mgan {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config field '" + field + "': cannot parse '" + v + "' as a number");
  }
}

std::uint64_t parse_u64(const std::string& field, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config field '" + field + "': cannot parse '" + v + "' as an integer");
  }
  return out;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  bool have_env = false;
  bool have_total = false;

  std::istringstream in(text);
  std::string line;
  std::string section = "run";
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section != "run" && section != "env" && section != "train") {
        throw ConfigError("config: unknown section '" + section + "'");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    }

    if (section == "env") {
      if (key == "name") {
        cfg.env_name = value;
        have_env = true;
      } else {
        cfg.env_params[key] = value;
      }
      continue;
    }
    if (section == "run") {
      if (key == "env") {
        cfg.env_name = value;
        have_env = true;
      } else if (key == "algorithm") {
        if (value != "mgan" && value != "vdn" && value != "qmix") {
          throw ConfigError("config field 'algorithm': unknown algorithm '" + value + "'");
        }
        cfg.algorithm = value;
      } else if (key == "seed") {
        cfg.seed = parse_u64("seed", value);
      } else if (key == "out") {
        cfg.out_dir = value;
      } else if (key == "version") {
        // informational; accepted on re-parse of a resolved config
      } else {
        throw ConfigError("config: unknown field '" + key + "' in [run]");
      }
      continue;
    }

    TrainConfig& t = cfg.train;
    if (key == "gamma") {
      t.gamma = parse_double(key, value);
      if (t.gamma < 0.0 || t.gamma >= 1.0) {
        throw ConfigError("config field 'gamma': must be in [0,1)");
      }
    } else if (key == "epsilon_start") {
      t.epsilon_start = parse_double(key, value);
    } else if (key == "epsilon_end") {
      t.epsilon_end = parse_double(key, value);
    } else if (key == "epsilon_anneal_steps") {
      t.epsilon_anneal_steps = parse_u64(key, value);
    } else if (key == "buffer_capacity") {
      t.buffer_capacity = parse_u64(key, value);
      if (t.buffer_capacity == 0) {
        throw ConfigError("config field 'buffer_capacity': must be positive");
      }
    } else if (key == "batch_size") {
      t.batch_size = parse_u64(key, value);
      if (t.batch_size == 0) throw ConfigError("config field 'batch_size': must be positive");
    } else if (key == "target_update_interval") {
      t.target_update_interval = parse_u64(key, value);
    } else if (key == "n_graphs") {
      t.n_graphs = parse_u64(key, value);
    } else if (key == "learning_rate") {
      t.learning_rate = parse_double(key, value);
    } else if (key == "rms_decay") {
      t.rms_decay = parse_double(key, value);
    } else if (key == "rms_epsilon") {
      t.rms_epsilon = parse_double(key, value);
    } else if (key == "total_env_steps") {
      t.total_env_steps = parse_u64(key, value);
      have_total = true;
    } else if (key == "eval_interval") {
      t.eval_interval = parse_u64(key, value);
    } else if (key == "eval_episodes") {
      t.eval_episodes = parse_u64(key, value);
    } else if (key == "hidden_dim") {
      t.hidden_dim = parse_u64(key, value);
    } else if (key == "emb_dim") {
      t.emb_dim = parse_u64(key, value);
    } else if (key == "qmix_embed") {
      t.qmix_embed = parse_u64(key, value);
    } else if (key == "train_interval_episodes") {
      t.train_interval_episodes = parse_u64(key, value);
      if (t.train_interval_episodes == 0) {
        throw ConfigError("config field 'train_interval_episodes': must be positive");
      }
    } else if (key == "early_stop_return") {
      t.early_stop_return = parse_double(key, value);
    } else if (key == "early_stop_win_rate") {
      t.early_stop_win_rate = parse_double(key, value);
    } else {
      throw ConfigError("config: unknown field '" + key + "' in [train]");
    }
  }

  if (!have_env) throw ConfigError("config: missing required field 'env'");
  if (!have_total) throw ConfigError("config: missing required field 'total_env_steps'");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_text_file(path));
}

std::string serialize_run_config(const RunConfig& cfg) {
  std::ostringstream out;
  const TrainConfig& t = cfg.train;
  out << "[run]\n";
  out << "algorithm = " << cfg.algorithm << "\n";
  out << "env = " << cfg.env_name << "\n";
  out << "out = " << cfg.out_dir << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "version = " << kVersionString << "\n";
  out << "\n[env]\n";
  for (const auto& [k, v] : cfg.env_params) out << k << " = " << v << "\n";
  out << "\n[train]\n";
  out << "batch_size = " << t.batch_size << "\n";
  out << "buffer_capacity = " << t.buffer_capacity << "\n";
  if (t.early_stop_return) out << "early_stop_return = " << format_double(*t.early_stop_return) << "\n";
  if (t.early_stop_win_rate) {
    out << "early_stop_win_rate = " << format_double(*t.early_stop_win_rate) << "\n";
  }
  out << "emb_dim = " << t.emb_dim << "\n";
  out << "epsilon_anneal_steps = " << t.epsilon_anneal_steps << "\n";
  out << "epsilon_end = " << format_double(t.epsilon_end) << "\n";
  out << "epsilon_start = " << format_double(t.epsilon_start) << "\n";
  out << "eval_episodes = " << t.eval_episodes << "\n";
  out << "eval_interval = " << t.eval_interval << "\n";
  out << "gamma = " << format_double(t.gamma) << "\n";
  out << "hidden_dim = " << t.hidden_dim << "\n";
  out << "learning_rate = " << format_double(t.learning_rate) << "\n";
  out << "n_graphs = " << t.n_graphs << "\n";
  out << "qmix_embed = " << t.qmix_embed << "\n";
  out << "rms_decay = " << format_double(t.rms_decay) << "\n";
  out << "rms_epsilon = " << format_double(t.rms_epsilon) << "\n";
  out << "target_update_interval = " << t.target_update_interval << "\n";
  out << "total_env_steps = " << t.total_env_steps << "\n";
  out << "train_interval_episodes = " << t.train_interval_episodes << "\n";
  return out.str();
}

std::unique_ptr<Env> make_env_from(const RunConfig& cfg, EnvParams* resolved) {
  return make_env(cfg.env_name, cfg.env_params, resolved);
}

}  // namespace mgan
