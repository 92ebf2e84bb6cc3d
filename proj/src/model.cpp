#include "mgan/model.hpp"

namespace mgan {

ModelSpec ModelSpec::build(const std::string& algorithm, const EnvSpec& env,
                           const TrainConfig& train) {
  if (algorithm != "mgan" && algorithm != "vdn" && algorithm != "qmix") {
    throw ConfigError("unknown algorithm '" + algorithm + "'");
  }
  ModelSpec m;
  m.algorithm = algorithm;
  m.n_agents = static_cast<std::size_t>(env.n_agents);
  m.n_actions = static_cast<std::size_t>(env.n_actions);
  m.obs_dim = static_cast<std::size_t>(env.obs_dim);
  m.state_dim = static_cast<std::size_t>(env.state_dim);
  m.hidden = train.hidden_dim;
  m.emb_dim = train.emb_dim;
  m.n_graphs = train.n_graphs;
  m.qmix_embed = train.qmix_embed;
  return m;
}

ParameterTree ModelSpec::init_params(Rng& rng) const {
  ParameterTree params;
  agent_net().init_params(params, rng);
  if (algorithm == "mgan") {
    const GraphEncoder enc = graph_encoder();
    for (std::size_t g = 0; g < n_graphs; ++g) enc.init_params(params, rng, g);
    GraphEncoder::init_transform(params, rng, emb_dim);
    init_mgan_mixer(params, rng, state_dim, n_graphs);
  } else if (algorithm == "qmix") {
    qmix_head().init_params(params, rng);
  }
  return params;
}

VarId ModelSpec::mix(Tape& t, Binding& bind, VarId chosen_q, VarId state, VarId obs_feats,
                     const RealArray& adjacency, const RealArray& alive) const {
  if (algorithm == "vdn") return vdn_mix(t, chosen_q);
  if (algorithm == "qmix") return qmix_head().mix(t, bind, chosen_q, state);

  const GraphEncoder enc = graph_encoder();
  std::vector<VarId> scalars;
  scalars.reserve(n_graphs);
  for (std::size_t g = 0; g < n_graphs; ++g) {
    scalars.push_back(enc.encode(t, bind, g, obs_feats, adjacency).second);
  }
  return mgan_qtot(t, bind, chosen_q, scalars, state, alive);
}

ModelSpec::PolicyStep ModelSpec::policy_step(const ParameterTree& params, const RealArray& inputs,
                                             const RealArray& h) const {
  Tape t(/*grad_enabled=*/false);
  Binding bind(t, params);
  auto [q, h2] = agent_net().forward(t, bind, t.leaf(inputs), t.leaf(h));
  return PolicyStep{t.value(q), t.value(h2)};
}

ModelSpec::GraphOutputs ModelSpec::analyze_step(const ParameterTree& params,
                                                const RealArray& obs_feats,
                                                std::span<const std::uint8_t> alive) const {
  if (algorithm != "mgan") {
    throw ConfigError("analysis export requires an mgan checkpoint, got '" + algorithm + "'");
  }
  const std::size_t n = n_agents;
  RealArray adjacency({1, n, n});
  RealArray alive_row({1, n});
  for (std::size_t u = 0; u < n; ++u) {
    alive_row.at(u) = alive[u] ? 1.0 : 0.0;
    if (!alive[u]) continue;
    for (std::size_t v = 0; v < n; ++v) {
      if (alive[v]) adjacency.at3(0, u, v) = 1.0;
    }
  }

  Tape t(/*grad_enabled=*/false);
  Binding bind(t, params);
  VarId feats = t.leaf(obs_feats);
  const GraphEncoder enc = graph_encoder();

  GraphOutputs out;
  for (std::size_t g = 0; g < n_graphs; ++g) {
    auto [emb, c] = enc.encode(t, bind, g, feats, adjacency);
    VarId w = masked_softmax(t, c, alive_row, /*allow_empty_rows=*/true);
    out.embeddings.push_back(t.value(emb));
    RealArray c_row({n});
    RealArray w_row({n});
    for (std::size_t a = 0; a < n; ++a) {
      c_row.at(a) = t.value(c).at(a);
      w_row.at(a) = t.value(w).at(a);
    }
    out.scalars.push_back(std::move(c_row));
    out.weights.push_back(std::move(w_row));
  }
  return out;
}

}  // namespace mgan
