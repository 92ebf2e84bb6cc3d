#include <doctest.h>

#include "mgan/config.hpp"
#include "mgan/env.hpp"
#include "mgan/rng.hpp"

using namespace mgan;

namespace {

// Minimal single-agent bandit used to pin the oracle contract.
class BanditEnv final : public Env {
 public:
  explicit BanditEnv(std::vector<double> rewards) : rewards_(std::move(rewards)) {
    spec_.name = "bandit";
    spec_.n_agents = 1;
    spec_.n_actions = static_cast<int>(rewards_.size());
    spec_.obs_dim = 1;
    spec_.state_dim = 1;
    spec_.horizon = 1;
  }
  const EnvSpec& spec() const override { return spec_; }
  StepResult reset(std::uint64_t) override {
    done_ = false;
    return frame();
  }
  StepResult step(std::span<const int> actions) override {
    if (done_) throw std::logic_error("bandit: step after termination");
    done_ = true;
    StepResult r = frame();
    r.reward = rewards_[static_cast<std::size_t>(actions[0])];
    r.terminated = true;
    return r;
  }
  std::unique_ptr<Env> clone() const override { return std::make_unique<BanditEnv>(*this); }

 private:
  StepResult frame() const {
    StepResult r;
    r.obs.push_back(RealArray::scalar(1.0));
    r.state = RealArray::scalar(1.0);
    r.alive = {1};
    r.avail = {std::vector<std::uint8_t>(rewards_.size(), 1)};
    return r;
  }
  std::vector<double> rewards_;
  EnvSpec spec_;
  bool done_ = false;
};

void check_frame_shapes(const StepResult& r, const EnvSpec& spec) {
  REQUIRE(r.obs.size() == static_cast<std::size_t>(spec.n_agents));
  for (const auto& o : r.obs) {
    CHECK(o.numel() == static_cast<std::size_t>(spec.obs_dim));
    CHECK(o.finite());
  }
  CHECK(r.state.numel() == static_cast<std::size_t>(spec.state_dim));
  CHECK(r.state.finite());
  REQUIRE(r.alive.size() == static_cast<std::size_t>(spec.n_agents));
  REQUIRE(r.avail.size() == static_cast<std::size_t>(spec.n_agents));
  for (const auto& row : r.avail) CHECK(row.size() == static_cast<std::size_t>(spec.n_actions));
}

std::vector<int> random_actions(const StepResult& view, Rng& rng) {
  std::vector<int> actions;
  for (const auto& avail : view.avail) {
    std::vector<int> ok;
    for (std::size_t u = 0; u < avail.size(); ++u) {
      if (avail[u]) ok.push_back(static_cast<int>(u));
    }
    actions.push_back(ok[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(ok.size()) - 1))]);
  }
  return actions;
}

}  // namespace

TEST_CASE("matrix game basics and oracle") {
  auto env = make_matrix_game({{10, 0}, {0, 10}});
  StepResult r = env->reset(0);
  check_frame_shapes(r, env->spec());

  CHECK(brute_force_optimal(*env) == doctest::Approx(10.0));

  StepResult done = env->step(std::vector<int>{0, 0});
  CHECK(done.reward == 10.0);
  CHECK(done.terminated);
  CHECK(done.success);
  CHECK_THROWS_AS(env->step(std::vector<int>{0, 0}), std::logic_error);

  // miscoordination pays 0 and is not a success
  env->reset(0);
  StepResult bad = env->step(std::vector<int>{0, 1});
  CHECK(bad.reward == 0.0);
  CHECK_FALSE(bad.success);

  // constant payoff: every policy is optimal
  auto flat = make_matrix_game({{3, 3}, {3, 3}});
  flat->reset(0);
  CHECK(flat->step(std::vector<int>{1, 0}).success);
}

TEST_CASE("two step game pays 7 on branch A and up to 8 on branch B") {
  auto env = make_two_step_game();
  CHECK(brute_force_optimal(*env) == doctest::Approx(8.0));

  env->reset(0);
  env->step(std::vector<int>{0, 1});  // branch A; agent 1's action ignored
  StepResult a = env->step(std::vector<int>{1, 0});
  CHECK(a.reward == 7.0);
  CHECK(a.terminated);
  CHECK_FALSE(a.success);

  env->reset(0);
  StepResult mid = env->step(std::vector<int>{1, 0});  // branch B
  CHECK(mid.reward == 0.0);
  CHECK_FALSE(mid.terminated);
  CHECK(mid.obs[0].at(2) == 1.0);  // branch flag visible
  StepResult b = env->step(std::vector<int>{0, 0});
  CHECK(b.reward == 0.0);

  env->reset(0);
  env->step(std::vector<int>{1, 0});
  StepResult best = env->step(std::vector<int>{1, 1});
  CHECK(best.reward == 8.0);
  CHECK(best.success);
}

TEST_CASE("brute force oracle on the bandit picks the max reward") {
  BanditEnv env({0.25, -3.0, 1.75});
  CHECK(brute_force_optimal(env) == doctest::Approx(1.75));
}

TEST_CASE("brute force oracle rejects oversized spaces") {
  SkirmishConfig cfg;
  auto env = make_skirmish(cfg);
  CHECK_THROWS_AS(brute_force_optimal(*env, 0, 20'000), std::runtime_error);
}

TEST_CASE("skirmish immediate win when one attack kills the last enemy") {
  SkirmishConfig cfg;
  cfg.width = 4;
  cfg.height = 1;
  cfg.n_allies = 1;
  cfg.n_enemies = 1;
  cfg.ally_hp = 5;
  cfg.enemy_hp = 2;
  cfg.ally_damage = 2;  // one hit kills
  cfg.attack_range = 2;
  auto env = make_skirmish(cfg);
  StepResult r = env->reset(1);
  check_frame_shapes(r, env->spec());
  REQUIRE(r.avail[0][6] == 1);  // enemy in range at spawn
  StepResult done = env->step(std::vector<int>{6});
  CHECK(done.terminated);
  CHECK(done.success);
  CHECK(done.reward == doctest::Approx(1.0));  // full normalized return in one step
}

TEST_CASE("skirmish dead agent only has no-op and alive mask never recovers") {
  SkirmishConfig cfg;
  cfg.width = 5;
  cfg.height = 2;
  cfg.n_allies = 2;
  cfg.n_enemies = 2;
  cfg.ally_hp = 1;  // first focused hit kills
  cfg.enemy_hp = 50;
  cfg.enemy_damage = 1;
  cfg.attack_range = 4;
  auto env = make_skirmish(cfg);
  StepResult view = env->reset(3);

  bool saw_death = false;
  std::vector<std::uint8_t> prev_alive = view.alive;
  for (int t = 0; t < cfg.horizon && !view.terminated; ++t) {
    std::vector<int> actions;
    for (std::size_t a = 0; a < view.avail.size(); ++a) {
      actions.push_back(view.alive[a] ? 1 : 0);  // stop / forced no-op
    }
    view = env->step(actions);
    for (std::size_t a = 0; a < view.alive.size(); ++a) {
      CHECK(view.alive[a] <= prev_alive[a]);  // monotone non-increasing
      if (!view.alive[a]) {
        saw_death = true;
        CHECK(view.avail[a][0] == 1);
        for (std::size_t u = 1; u < view.avail[a].size(); ++u) CHECK(view.avail[a][u] == 0);
        for (double v : view.obs[a].values()) CHECK(v == 0.0);  // dead agents emit zeros
      }
    }
    prev_alive = view.alive;
  }
  CHECK(saw_death);
}

TEST_CASE("skirmish reward conservation and normalized cap under random play") {
  SkirmishConfig cfg;  // defaults: 5v3
  auto env = make_skirmish(cfg);
  const EnvSpec& spec = env->spec();
  const double max_raw = cfg.n_enemies * cfg.enemy_hp + 10.0 * cfg.n_enemies + 200.0;

  Rng rng(17);
  for (int episode = 0; episode < 15; ++episode) {
    StepResult view = env->reset(static_cast<std::uint64_t>(episode));
    double total = 0.0;
    std::vector<double> initial_hp, final_hp;
    for (int j = 0; j < cfg.n_enemies; ++j) {
      initial_hp.push_back(view.state.at(4 * (cfg.n_allies + j) + 1) * cfg.enemy_hp);
    }
    bool success = false;
    while (!view.terminated) {
      check_frame_shapes(view, spec);
      view = env->step(random_actions(view, rng));
      total += view.reward;
      success = view.success;
    }
    int kills = 0;
    double damage = 0.0;
    for (int j = 0; j < cfg.n_enemies; ++j) {
      const double hp = view.state.at(4 * (cfg.n_allies + j) + 1) * cfg.enemy_hp;
      damage += initial_hp[j] - hp;
      if (view.state.at(4 * (cfg.n_allies + j)) == 0.0) ++kills;
    }
    const double expected = (damage + 10.0 * kills + (success ? 200.0 : 0.0)) / max_raw;
    CHECK(total == doctest::Approx(expected).epsilon(1e-12));
    CHECK(total <= 1.0 + 1e-12);
  }
}

TEST_CASE("skirmish is deterministic given the seed") {
  SkirmishConfig cfg;
  auto a = make_skirmish(cfg);
  auto b = make_skirmish(cfg);
  Rng rng_a(5), rng_b(5);
  StepResult va = a->reset(9), vb = b->reset(9);
  while (!va.terminated) {
    const auto actions = random_actions(va, rng_a);
    const auto actions_b = random_actions(vb, rng_b);
    REQUIRE(actions == actions_b);
    va = a->step(actions);
    vb = b->step(actions_b);
    CHECK(va.reward == vb.reward);
    for (std::size_t i = 0; i < va.state.numel(); ++i) CHECK(va.state.at(i) == vb.state.at(i));
  }
  CHECK(vb.terminated);
}

TEST_CASE("skirmish validates its config") {
  SkirmishConfig bad;
  bad.n_allies = 50;  // taller than the board
  CHECK_THROWS_AS(make_skirmish(bad), std::invalid_argument);
  SkirmishConfig zero;
  zero.enemy_hp = 0;
  CHECK_THROWS_AS(make_skirmish(zero), std::invalid_argument);
}

TEST_CASE("env factory resolves params and rejects unknown ones") {
  EnvParams params{{"n_allies", "3"}, {"n_enemies", "2"}};
  EnvParams resolved;
  auto env = make_env("skirmish", params, &resolved);
  CHECK(env->spec().n_agents == 3);
  CHECK(resolved.at("n_allies") == "3");
  CHECK(resolved.count("width") == 1);  // defaults materialized

  CHECK_THROWS_AS(make_env("skirmish", EnvParams{{"bogus", "1"}}, nullptr), ConfigError);
  CHECK_THROWS_AS(make_env("skirmish", EnvParams{{"width", "abc"}}, nullptr), ConfigError);
  CHECK_THROWS_AS(make_env("warp", EnvParams{}, nullptr), ConfigError);

  auto matrix = make_env("matrix", EnvParams{{"payoff", "1,2;3,4"}}, nullptr);
  matrix->reset(0);
  CHECK(matrix->step(std::vector<int>{1, 1}).reward == 4.0);
}
