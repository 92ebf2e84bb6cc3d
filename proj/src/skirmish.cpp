#include <algorithm>
#include <cstdlib>

#include "mgan/env.hpp"
#include "mgan/rng.hpp"

namespace mgan {

namespace {

// Actions: 0 no-op (dead only), 1 stop, 2..5 move N/S/W/E, 6+j attack enemy j.
constexpr int kNoop = 0;
constexpr int kStop = 1;
constexpr int kMoveBase = 2;
constexpr int kAttackBase = 6;
constexpr int kMoveDx[4] = {0, 0, -1, 1};
constexpr int kMoveDy[4] = {-1, 1, 0, 0};

struct Unit {
  int x = 0;
  int y = 0;
  int hp = 0;
  int max_hp = 0;
  bool alive() const { return hp > 0; }
};

int chebyshev(const Unit& a, const Unit& b) {
  return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

class Skirmish final : public Env {
 public:
  explicit Skirmish(const SkirmishConfig& cfg) : cfg_(cfg) {
    if (cfg.width < 2 || cfg.height < 1 || cfg.n_allies < 1 || cfg.n_enemies < 1 ||
        cfg.ally_hp < 1 || cfg.enemy_hp < 1 || cfg.ally_damage < 1 || cfg.enemy_damage < 0 ||
        cfg.attack_range < 1 || cfg.sight_range < 1 || cfg.horizon < 1) {
      throw std::invalid_argument("skirmish: invalid config value");
    }
    if (cfg.n_allies > cfg.height || cfg.n_enemies > cfg.height) {
      throw std::invalid_argument("skirmish: board does not fit all units");
    }
    spec_.name = "skirmish";
    spec_.n_agents = cfg.n_allies;
    spec_.n_actions = kAttackBase + cfg.n_enemies;
    spec_.obs_dim = 3 + 4 * (cfg.n_allies - 1 + cfg.n_enemies);
    spec_.state_dim = 4 * (cfg.n_allies + cfg.n_enemies) + 1;
    spec_.horizon = cfg.horizon;
    spec_.success_rule = "all enemies dead";
    max_return_raw_ = static_cast<double>(cfg.n_enemies * cfg.enemy_hp) +
                      10.0 * cfg.n_enemies + 200.0;
  }

  const EnvSpec& spec() const override { return spec_; }

  StepResult reset(std::uint64_t seed) override {
    t_ = 0;
    done_ = false;
    allies_.assign(static_cast<std::size_t>(cfg_.n_allies), Unit{});
    enemies_.assign(static_cast<std::size_t>(cfg_.n_enemies), Unit{});
    // Opposing columns; the seed shuffles which rows get occupied so greedy
    // policies face varied engagements.
    Rng rng(Rng::derive(seed, 0x5c1));
    auto rows_for = [&](int count) {
      std::vector<int> rows(static_cast<std::size_t>(cfg_.height));
      for (int y = 0; y < cfg_.height; ++y) rows[static_cast<std::size_t>(y)] = y;
      for (std::size_t i = rows.size(); i-- > 1;) {
        std::swap(rows[i], rows[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i)))]);
      }
      rows.resize(static_cast<std::size_t>(count));
      std::sort(rows.begin(), rows.end());
      return rows;
    };
    const auto ally_rows = rows_for(cfg_.n_allies);
    const auto enemy_rows = rows_for(cfg_.n_enemies);
    for (int i = 0; i < cfg_.n_allies; ++i) {
      auto& u = allies_[static_cast<std::size_t>(i)];
      u.x = 1;
      u.y = ally_rows[static_cast<std::size_t>(i)];
      u.hp = u.max_hp = cfg_.ally_hp;
    }
    for (int j = 0; j < cfg_.n_enemies; ++j) {
      auto& u = enemies_[static_cast<std::size_t>(j)];
      u.x = cfg_.width - 2;
      u.y = enemy_rows[static_cast<std::size_t>(j)];
      u.hp = u.max_hp = cfg_.enemy_hp;
    }
    return observe(0.0, false, false, false);
  }

  StepResult step(std::span<const int> actions) override {
    if (done_) throw std::logic_error("skirmish: step after termination");
    if (actions.size() != static_cast<std::size_t>(cfg_.n_allies)) {
      throw std::invalid_argument("skirmish: wrong number of actions");
    }
    auto avail = availability();
    for (int i = 0; i < cfg_.n_allies; ++i) {
      const int u = actions[static_cast<std::size_t>(i)];
      if (u < 0 || u >= spec_.n_actions || !avail[static_cast<std::size_t>(i)][static_cast<std::size_t>(u)]) {
        throw std::invalid_argument("skirmish: unavailable action " + std::to_string(u) +
                                    " for agent " + std::to_string(i));
      }
    }

    // Enemy intents are decided from the pre-step positions.
    std::vector<int> enemy_attack(enemies_.size(), -1);
    std::vector<std::pair<int, int>> enemy_move(enemies_.size(), {0, 0});
    for (std::size_t j = 0; j < enemies_.size(); ++j) {
      if (!enemies_[j].alive()) continue;
      int target = nearest_alive_ally(enemies_[j]);
      if (target < 0) continue;
      const Unit& tgt = allies_[static_cast<std::size_t>(target)];
      if (chebyshev(enemies_[j], tgt) <= cfg_.attack_range) {
        enemy_attack[j] = target;
      } else {
        const int dx = tgt.x - enemies_[j].x;
        const int dy = tgt.y - enemies_[j].y;
        if (std::abs(dx) >= std::abs(dy) && dx != 0) {
          enemy_move[j] = {dx > 0 ? 1 : -1, 0};
        } else if (dy != 0) {
          enemy_move[j] = {0, dy > 0 ? 1 : -1};
        }
      }
    }

    // Simultaneous resolution in fixed unit order: allies first, then
    // enemies. Moves fail quietly when the target cell is taken.
    std::vector<int> ally_damage(allies_.size(), 0);
    std::vector<int> enemy_damage(enemies_.size(), 0);
    for (std::size_t i = 0; i < allies_.size(); ++i) {
      Unit& a = allies_[i];
      if (!a.alive()) continue;
      const int u = actions[i];
      if (u >= kAttackBase) {
        enemy_damage[static_cast<std::size_t>(u - kAttackBase)] += cfg_.ally_damage;
      } else if (u >= kMoveBase) {
        try_move(a, kMoveDx[u - kMoveBase], kMoveDy[u - kMoveBase]);
      }
    }
    for (std::size_t j = 0; j < enemies_.size(); ++j) {
      Unit& e = enemies_[j];
      if (!e.alive()) continue;
      if (enemy_attack[j] >= 0) {
        ally_damage[static_cast<std::size_t>(enemy_attack[j])] += cfg_.enemy_damage;
      } else if (enemy_move[j].first != 0 || enemy_move[j].second != 0) {
        try_move(e, enemy_move[j].first, enemy_move[j].second);
      }
    }

    double reward_raw = 0.0;
    int kills = 0;
    for (std::size_t j = 0; j < enemies_.size(); ++j) {
      Unit& e = enemies_[j];
      if (!e.alive() || enemy_damage[j] == 0) continue;
      const int effective = std::min(enemy_damage[j], e.hp);
      reward_raw += effective;
      e.hp -= effective;
      if (!e.alive()) ++kills;
    }
    for (std::size_t i = 0; i < allies_.size(); ++i) {
      Unit& a = allies_[i];
      if (!a.alive() || ally_damage[i] == 0) continue;
      a.hp = std::max(0, a.hp - ally_damage[i]);
    }
    reward_raw += 10.0 * kills;

    ++t_;
    const bool enemies_dead = alive_count(enemies_) == 0;
    const bool allies_dead = alive_count(allies_) == 0;
    if (enemies_dead) reward_raw += 200.0;
    const bool truncated = !enemies_dead && !allies_dead && t_ >= cfg_.horizon;
    done_ = enemies_dead || allies_dead || truncated;
    return observe(reward_raw / max_return_raw_, done_, truncated, enemies_dead);
  }

  std::unique_ptr<Env> clone() const override { return std::make_unique<Skirmish>(*this); }

 private:
  static int alive_count(const std::vector<Unit>& units) {
    int n = 0;
    for (const auto& u : units) n += u.alive();
    return n;
  }

  int nearest_alive_ally(const Unit& from) const {
    int best = -1;
    int best_d = 0;
    for (std::size_t i = 0; i < allies_.size(); ++i) {
      if (!allies_[i].alive()) continue;
      const int d = chebyshev(from, allies_[i]);
      if (best < 0 || d < best_d) {
        best = static_cast<int>(i);
        best_d = d;
      }
    }
    return best;
  }

  bool occupied(int x, int y) const {
    for (const auto& u : allies_) {
      if (u.alive() && u.x == x && u.y == y) return true;
    }
    for (const auto& u : enemies_) {
      if (u.alive() && u.x == x && u.y == y) return true;
    }
    return false;
  }

  void try_move(Unit& u, int dx, int dy) {
    const int nx = u.x + dx, ny = u.y + dy;
    if (nx < 0 || nx >= cfg_.width || ny < 0 || ny >= cfg_.height) return;
    if (occupied(nx, ny)) return;
    u.x = nx;
    u.y = ny;
  }

  std::vector<std::vector<std::uint8_t>> availability() const {
    std::vector<std::vector<std::uint8_t>> avail;
    avail.reserve(allies_.size());
    for (const auto& a : allies_) {
      std::vector<std::uint8_t> row(static_cast<std::size_t>(spec_.n_actions), 0);
      if (!a.alive()) {
        row[kNoop] = 1;
      } else {
        row[kStop] = 1;
        for (int m = 0; m < 4; ++m) {
          const int nx = a.x + kMoveDx[m], ny = a.y + kMoveDy[m];
          if (nx >= 0 && nx < cfg_.width && ny >= 0 && ny < cfg_.height) {
            row[static_cast<std::size_t>(kMoveBase + m)] = 1;
          }
        }
        for (std::size_t j = 0; j < enemies_.size(); ++j) {
          if (enemies_[j].alive() && chebyshev(a, enemies_[j]) <= cfg_.attack_range) {
            row[kAttackBase + j] = 1;
          }
        }
      }
      avail.push_back(std::move(row));
    }
    return avail;
  }

  StepResult observe(double reward, bool terminated, bool truncated, bool success) const {
    StepResult r;
    const double wn = cfg_.width > 1 ? cfg_.width - 1 : 1;
    const double hn = cfg_.height > 1 ? cfg_.height - 1 : 1;

    for (std::size_t i = 0; i < allies_.size(); ++i) {
      const Unit& self = allies_[i];
      RealArray obs({static_cast<std::size_t>(spec_.obs_dim)});
      if (self.alive()) {
        std::size_t k = 0;
        obs.at(k++) = static_cast<double>(self.hp) / self.max_hp;
        obs.at(k++) = self.x / wn;
        obs.at(k++) = self.y / hn;
        auto put_unit = [&](const Unit& u) {
          if (u.alive() && chebyshev(self, u) <= cfg_.sight_range) {
            obs.at(k++) = 1.0;
            obs.at(k++) = (u.x - self.x) / wn;
            obs.at(k++) = (u.y - self.y) / hn;
            obs.at(k++) = static_cast<double>(u.hp) / u.max_hp;
          } else {
            k += 4;
          }
        };
        for (std::size_t o = 0; o < allies_.size(); ++o) {
          if (o != i) put_unit(allies_[o]);
        }
        for (const auto& e : enemies_) put_unit(e);
      }
      r.obs.push_back(std::move(obs));
      r.alive.push_back(self.alive() ? 1 : 0);
      r.agent_hp.push_back(static_cast<double>(self.hp) / self.max_hp);
    }

    RealArray state({static_cast<std::size_t>(spec_.state_dim)});
    std::size_t k = 0;
    auto put_state = [&](const Unit& u) {
      state.at(k++) = u.alive() ? 1.0 : 0.0;
      state.at(k++) = static_cast<double>(u.hp) / u.max_hp;
      state.at(k++) = u.x / wn;
      state.at(k++) = u.y / hn;
    };
    for (const auto& a : allies_) put_state(a);
    for (const auto& e : enemies_) put_state(e);
    state.at(k) = static_cast<double>(t_) / cfg_.horizon;
    r.state = std::move(state);

    r.avail = availability();
    r.reward = reward;
    r.terminated = terminated;
    r.truncated = truncated;
    r.success = success;
    return r;
  }

  SkirmishConfig cfg_;
  EnvSpec spec_;
  std::vector<Unit> allies_;
  std::vector<Unit> enemies_;
  double max_return_raw_ = 1.0;
  int t_ = 0;
  bool done_ = false;
};

}  // namespace

std::unique_ptr<Env> make_skirmish(const SkirmishConfig& cfg) {
  return std::make_unique<Skirmish>(cfg);
}

}  // namespace mgan
