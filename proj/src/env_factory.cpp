#include <charconv>
#include <sstream>

#include "mgan/config.hpp"
#include "mgan/env.hpp"

namespace mgan {

namespace {

// Consumes keys from the param map so leftovers can be reported.
class ParamReader {
 public:
  explicit ParamReader(EnvParams params) : params_(std::move(params)) {}

  int get_int(const std::string& key, int fallback) {
    auto it = params_.find(key);
    if (it == params_.end()) {
      resolved_[key] = std::to_string(fallback);
      return fallback;
    }
    int out = 0;
    const std::string& v = it->second;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw ConfigError("env parameter '" + key + "': cannot parse '" + v + "' as an integer");
    }
    resolved_[key] = v;
    params_.erase(it);
    return out;
  }

  std::string get_string(const std::string& key, const std::string& fallback) {
    auto it = params_.find(key);
    if (it == params_.end()) {
      resolved_[key] = fallback;
      return fallback;
    }
    std::string v = it->second;
    resolved_[key] = v;
    params_.erase(it);
    return v;
  }

  void finish(const std::string& env_name) const {
    if (!params_.empty()) {
      throw ConfigError("env parameter '" + params_.begin()->first + "' is not recognized by '" +
                        env_name + "'");
    }
  }

  const EnvParams& resolved() const { return resolved_; }

 private:
  EnvParams params_;
  EnvParams resolved_;
};

// "10,0;0,10" -> [[10,0],[0,10]]
std::vector<std::vector<double>> parse_payoff(const std::string& text) {
  std::vector<std::vector<double>> table;
  std::istringstream rows(text);
  std::string row;
  while (std::getline(rows, row, ';')) {
    std::vector<double> values;
    std::istringstream cells(row);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("env parameter 'payoff': cannot parse '" + cell + "'");
      }
    }
    table.push_back(std::move(values));
  }
  if (table.empty()) throw ConfigError("env parameter 'payoff': empty table");
  return table;
}

}  // namespace

std::unique_ptr<Env> make_env(const std::string& name, const EnvParams& params,
                              EnvParams* resolved) {
  ParamReader reader(params);
  std::unique_ptr<Env> env;
  if (name == "matrix") {
    auto payoff = parse_payoff(reader.get_string("payoff", "10,0;0,10"));
    env = make_matrix_game(payoff);
  } else if (name == "two_step") {
    env = make_two_step_game();
  } else if (name == "skirmish") {
    SkirmishConfig cfg;
    cfg.width = reader.get_int("width", cfg.width);
    cfg.height = reader.get_int("height", cfg.height);
    cfg.n_allies = reader.get_int("n_allies", cfg.n_allies);
    cfg.n_enemies = reader.get_int("n_enemies", cfg.n_enemies);
    cfg.ally_hp = reader.get_int("ally_hp", cfg.ally_hp);
    cfg.enemy_hp = reader.get_int("enemy_hp", cfg.enemy_hp);
    cfg.ally_damage = reader.get_int("ally_damage", cfg.ally_damage);
    cfg.enemy_damage = reader.get_int("enemy_damage", cfg.enemy_damage);
    cfg.attack_range = reader.get_int("attack_range", cfg.attack_range);
    cfg.sight_range = reader.get_int("sight_range", cfg.sight_range);
    cfg.horizon = reader.get_int("horizon", cfg.horizon);
    try {
      env = make_skirmish(cfg);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("env 'skirmish': ") + e.what());
    }
  } else {
    throw ConfigError("unknown env '" + name + "' (expected matrix, two_step or skirmish)");
  }
  reader.finish(name);
  if (resolved) *resolved = reader.resolved();
  return env;
}

}  // namespace mgan
