#include "mgan/episode.hpp"

#include "mgan/io.hpp"

namespace mgan {

std::string episode_to_jsonl(const Episode& episode) {
  std::string out;
  for (std::size_t t = 0; t < episode.length(); ++t) {
    out += "{\"t\": " + std::to_string(t) + ", \"actions\": [";
    for (std::size_t a = 0; a < episode.actions[t].size(); ++a) {
      if (a) out += ", ";
      out += std::to_string(episode.actions[t][a]);
    }
    out += "], \"reward\": " + format_double(episode.rewards[t]) + ", \"alive\": [";
    for (std::size_t a = 0; a < episode.alive[t + 1].size(); ++a) {
      if (a) out += ", ";
      out += episode.alive[t + 1][a] ? "1" : "0";
    }
    const bool last = t + 1 == episode.length();
    out += std::string("], \"terminated\": ") + (last ? "true" : "false");
    out += std::string(", \"truncated\": ") + (last && episode.truncated ? "true" : "false");
    out += std::string(", \"success\": ") + (last && episode.success ? "true" : "false");
    out += "}\n";
  }
  return out;
}

Episode collect_episode(Env& env, const ModelSpec& model, const ParameterTree& params,
                        double epsilon, std::uint64_t env_seed, Rng& rng) {
  const std::size_t n = model.n_agents;
  const std::size_t U = model.n_actions;

  Episode ep;
  StepResult view = env.reset(env_seed);
  RealArray h({n, model.hidden});
  std::vector<int> last_actions(n, -1);

  auto push_frame = [&](const StepResult& v) {
    ep.obs.push_back(v.obs);
    ep.state.push_back(v.state);
    ep.alive.push_back(v.alive);
    ep.avail.push_back(v.avail);
    ep.agent_hp.push_back(v.agent_hp);
  };
  push_frame(view);

  const int horizon = env.spec().horizon;
  for (int t = 0; t < horizon; ++t) {
    RealArray inputs({n, model.input_dim()});
    for (std::size_t a = 0; a < n; ++a) {
      AgentObservation o{view.obs[a], view.avail[a], static_cast<int>(a)};
      RealArray row = build_agent_input(o, last_actions[a], U, n);
      for (std::size_t i = 0; i < row.numel(); ++i) inputs.at2(a, i) = row.at(i);
    }
    auto step = model.policy_step(params, inputs, h);
    h = std::move(step.h_next);

    std::vector<int> actions(n);
    for (std::size_t a = 0; a < n; ++a) {
      RealArray q({U});
      for (std::size_t u = 0; u < U; ++u) q.at(u) = step.q.at2(a, u);
      actions[a] = select_action(q, view.avail[a], epsilon, rng);
    }

    view = env.step(actions);
    ep.actions.push_back(actions);
    ep.rewards.push_back(view.reward);
    push_frame(view);
    last_actions.assign(actions.begin(), actions.end());

    if (view.terminated) {
      ep.truncated = view.truncated;
      ep.success = view.success;
      return ep;
    }
  }
  // Defensive horizon guard; bundled envs terminate themselves.
  ep.truncated = true;
  return ep;
}

void ReplayBuffer::add(Episode episode) {
  if (episodes_.size() < capacity_) {
    episodes_.push_back(std::move(episode));
  } else {
    episodes_[next_] = std::move(episode);
    next_ = (next_ + 1) % capacity_;
  }
}

std::vector<const Episode*> ReplayBuffer::sample(std::size_t count, Rng& rng) const {
  if (count > episodes_.size()) {
    throw std::invalid_argument("ReplayBuffer: sampling " + std::to_string(count) +
                                " episodes but only " + std::to_string(episodes_.size()) +
                                " stored");
  }
  // Partial Fisher-Yates over the index range.
  std::vector<std::size_t> idx(episodes_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<const Episode*> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(
                                  0, static_cast<int>(idx.size() - 1 - i)));
    std::swap(idx[i], idx[j]);
    out.push_back(&episodes_[idx[i]]);
  }
  return out;
}

EpisodeBatch EpisodeBatch::assemble(std::span<const Episode* const> episodes,
                                    const ModelSpec& model) {
  if (episodes.empty()) throw std::invalid_argument("EpisodeBatch: empty batch");
  const std::size_t B = episodes.size();
  const std::size_t n = model.n_agents;
  const std::size_t U = model.n_actions;

  EpisodeBatch batch;
  batch.n_episodes = B;
  batch.n_agents = n;
  batch.n_actions = U;
  for (const Episode* ep : episodes) batch.max_len = std::max(batch.max_len, ep->length());
  const std::size_t T = batch.max_len;

  for (std::size_t t = 0; t <= T; ++t) {
    batch.inputs.emplace_back(Shape{B * n, model.input_dim()});
    batch.obs.emplace_back(Shape{B * n, model.obs_dim});
    batch.state.emplace_back(Shape{B, model.state_dim});
    batch.alive.emplace_back(Shape{B, n});
    batch.adjacency.emplace_back(Shape{B, n, n});
    // Padded rows keep action 0 available so greedy argmax stays defined.
    std::vector<std::uint8_t> av(B * n * U, 0);
    for (std::size_t r = 0; r < B * n; ++r) av[r * U] = 1;
    batch.avail.push_back(std::move(av));
  }
  for (std::size_t t = 0; t < T; ++t) {
    batch.actions.emplace_back(B * n, 0);
    batch.reward.emplace_back(Shape{B});
    batch.terminated.emplace_back(Shape{B});
    batch.filled.emplace_back(Shape{B});
  }

  for (std::size_t b = 0; b < B; ++b) {
    const Episode& ep = *episodes[b];
    const std::size_t len = ep.length();
    for (std::size_t t = 0; t <= len; ++t) {
      RealArray& obs_t = batch.obs[t];
      RealArray& in_t = batch.inputs[t];
      for (std::size_t a = 0; a < n; ++a) {
        const std::size_t row = b * n + a;
        const RealArray& o = ep.obs[t][a];
        for (std::size_t i = 0; i < o.numel(); ++i) obs_t.at2(row, i) = o.at(i);
        // input = [obs ‖ last action one-hot ‖ id one-hot]
        for (std::size_t i = 0; i < o.numel(); ++i) in_t.at2(row, i) = o.at(i);
        if (t > 0) in_t.at2(row, model.obs_dim + static_cast<std::size_t>(ep.actions[t - 1][a])) = 1.0;
        in_t.at2(row, model.obs_dim + U + a) = 1.0;
        batch.alive[t].at2(b, a) = ep.alive[t][a] ? 1.0 : 0.0;
        for (std::size_t u = 0; u < U; ++u) {
          batch.avail[t][row * U + u] = ep.avail[t][a][u];
        }
      }
      for (std::size_t i = 0; i < ep.state[t].numel(); ++i) {
        batch.state[t].at2(b, i) = ep.state[t].at(i);
      }
      for (std::size_t u = 0; u < n; ++u) {
        if (!ep.alive[t][u]) continue;
        for (std::size_t v = 0; v < n; ++v) {
          if (ep.alive[t][v]) batch.adjacency[t].at3(b, u, v) = 1.0;
        }
      }
    }
    for (std::size_t t = 0; t < len; ++t) {
      for (std::size_t a = 0; a < n; ++a) {
        batch.actions[t][b * n + a] = static_cast<std::size_t>(ep.actions[t][a]);
      }
      batch.reward[t].at(b) = ep.rewards[t];
      batch.filled[t].at(b) = 1.0;
      batch.total_filled += 1.0;
      if (t + 1 == len) batch.terminated[t].at(b) = 1.0;
    }
  }
  return batch;
}

}  // namespace mgan
