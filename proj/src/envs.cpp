#include <algorithm>
#include <functional>

#include "mgan/env.hpp"

namespace mgan {

namespace {

std::vector<std::uint8_t> all_available(int n_actions) {
  return std::vector<std::uint8_t>(static_cast<std::size_t>(n_actions), 1);
}

class MatrixGame final : public Env {
 public:
  explicit MatrixGame(std::vector<std::vector<double>> payoff) : payoff_(std::move(payoff)) {
    if (payoff_.empty()) throw std::invalid_argument("matrix game: empty payoff table");
    max_payoff_ = payoff_[0][0];
    for (const auto& row : payoff_) {
      if (row.size() != payoff_.size()) {
        throw std::invalid_argument("matrix game: payoff table must be square");
      }
      for (double v : row) {
        if (!std::isfinite(v)) throw std::invalid_argument("matrix game: non-finite payoff");
        max_payoff_ = std::max(max_payoff_, v);
      }
    }
    spec_.name = "matrix";
    spec_.n_agents = 2;
    spec_.n_actions = static_cast<int>(payoff_.size());
    spec_.obs_dim = 3;  // constant + id one-hot
    spec_.state_dim = 1;
    spec_.horizon = 1;
    spec_.success_rule = "reward equals the payoff-table maximum";
  }

  const EnvSpec& spec() const override { return spec_; }

  StepResult reset(std::uint64_t) override {
    done_ = false;
    return observe();
  }

  StepResult step(std::span<const int> actions) override {
    if (done_) throw std::logic_error("matrix game: step after termination");
    check_actions(actions);
    done_ = true;
    StepResult r = observe();  // observations are constant
    r.reward = payoff_[static_cast<std::size_t>(actions[0])][static_cast<std::size_t>(actions[1])];
    r.terminated = true;
    r.success = r.reward == max_payoff_;
    return r;
  }

  std::unique_ptr<Env> clone() const override { return std::make_unique<MatrixGame>(*this); }

 private:
  StepResult observe() const {
    StepResult r;
    for (int a = 0; a < 2; ++a) {
      RealArray obs({3});
      obs.at(0) = 1.0;
      obs.at(1 + static_cast<std::size_t>(a)) = 1.0;
      r.obs.push_back(std::move(obs));
    }
    r.state = RealArray::scalar(1.0);
    r.alive = {1, 1};
    r.avail = {all_available(spec_.n_actions), all_available(spec_.n_actions)};
    r.agent_hp = {1.0, 1.0};
    return r;
  }

  void check_actions(std::span<const int> actions) const {
    if (actions.size() != 2) throw std::invalid_argument("matrix game: need 2 actions");
    for (int u : actions) {
      if (u < 0 || u >= spec_.n_actions) {
        throw std::invalid_argument("matrix game: action out of range");
      }
    }
  }

  std::vector<std::vector<double>> payoff_;
  double max_payoff_ = 0.0;
  EnvSpec spec_;
  bool done_ = false;
};

class TwoStepGame final : public Env {
 public:
  TwoStepGame() {
    spec_.name = "two_step";
    spec_.n_agents = 2;
    spec_.n_actions = 2;
    spec_.obs_dim = 5;  // phase one-hot (start/A/B) + id one-hot
    spec_.state_dim = 3;
    spec_.horizon = 2;
    spec_.success_rule = "episode return equals 8";
  }

  const EnvSpec& spec() const override { return spec_; }

  StepResult reset(std::uint64_t) override {
    phase_ = 0;
    return observe();
  }

  StepResult step(std::span<const int> actions) override {
    if (phase_ < 0 || phase_ > 2) throw std::logic_error("two_step: step after termination");
    if (actions.size() != 2) throw std::invalid_argument("two_step: need 2 actions");
    for (int u : actions) {
      if (u < 0 || u > 1) throw std::invalid_argument("two_step: action out of range");
    }
    if (phase_ == 0) {
      // Agent 0 picks the branch; agent 1's action is ignored at this step.
      phase_ = actions[0] == 0 ? 1 : 2;
      return observe();
    }
    const double reward = phase_ == 1 ? 7.0 : kBranchB[actions[0]][actions[1]];
    phase_ = 3;
    StepResult r = observe_frame(phase_);
    r.reward = reward;
    r.terminated = true;
    r.success = reward == 8.0;
    return r;
  }

  std::unique_ptr<Env> clone() const override { return std::make_unique<TwoStepGame>(*this); }

 private:
  static constexpr double kBranchB[2][2] = {{0.0, 1.0}, {1.0, 8.0}};

  StepResult observe() const { return observe_frame(phase_); }

  StepResult observe_frame(int phase) const {
    StepResult r;
    const int code = std::min(phase, 2);  // terminal keeps the branch code
    for (int a = 0; a < 2; ++a) {
      RealArray obs({5});
      obs.at(static_cast<std::size_t>(code)) = 1.0;
      obs.at(3 + static_cast<std::size_t>(a)) = 1.0;
      r.obs.push_back(std::move(obs));
    }
    r.state = RealArray({3});
    r.state.at(static_cast<std::size_t>(code)) = 1.0;
    r.alive = {1, 1};
    r.avail = {all_available(2), all_available(2)};
    r.agent_hp = {1.0, 1.0};
    return r;
  }

  EnvSpec spec_;
  int phase_ = 0;  // 0 start, 1 branch A, 2 branch B, 3 done
};

}  // namespace

std::unique_ptr<Env> make_matrix_game(const std::vector<std::vector<double>>& payoff) {
  return std::make_unique<MatrixGame>(payoff);
}

std::unique_ptr<Env> make_two_step_game() { return std::make_unique<TwoStepGame>(); }

double brute_force_optimal(const Env& env, std::uint64_t seed, std::uint64_t max_expansions) {
  std::uint64_t expansions = 0;

  // Enumerate every sequence of available joint actions; deterministic
  // transitions make the open-loop optimum the true optimum.
  std::function<double(const Env&, const StepResult&)> best_from =
      [&](const Env& at, const StepResult& view) -> double {
    const int n = at.spec().n_agents;
    std::vector<std::vector<int>> choices(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
      const auto& avail = view.avail[static_cast<std::size_t>(a)];
      for (std::size_t u = 0; u < avail.size(); ++u) {
        if (avail[u]) choices[static_cast<std::size_t>(a)].push_back(static_cast<int>(u));
      }
      if (choices[static_cast<std::size_t>(a)].empty()) {
        throw std::logic_error("brute_force_optimal: agent with no available action");
      }
    }

    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> pick(static_cast<std::size_t>(n), 0);
    std::vector<int> joint(static_cast<std::size_t>(n));
    while (true) {
      for (int a = 0; a < n; ++a) {
        joint[static_cast<std::size_t>(a)] =
            choices[static_cast<std::size_t>(a)][pick[static_cast<std::size_t>(a)]];
      }
      if (++expansions > max_expansions) {
        throw std::runtime_error("brute_force_optimal: joint policy space too large");
      }
      auto child = at.clone();
      StepResult res = child->step(joint);
      double total = res.reward;
      if (!res.terminated) total += best_from(*child, res);
      best = std::max(best, total);

      // odometer over the joint action space
      int d = 0;
      for (; d < n; ++d) {
        auto& p = pick[static_cast<std::size_t>(d)];
        if (++p < choices[static_cast<std::size_t>(d)].size()) break;
        p = 0;
      }
      if (d == n) break;
    }
    return best;
  };

  auto root = env.clone();
  StepResult view = root->reset(seed);
  return best_from(*root, view);
}

}  // namespace mgan
