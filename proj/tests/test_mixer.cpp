#include <doctest.h>

#include "mgan/mixer.hpp"
#include "support.hpp"

using namespace mgan;
using test::random_array;

namespace {

RealArray row(std::vector<double> v) {
  Shape s{1, v.size()};
  return RealArray(std::move(s), std::move(v));
}

RealArray alive_row(std::vector<double> v) { return row(std::move(v)); }

ParameterTree mixer_params(std::size_t state_dim, std::size_t G, std::uint64_t seed) {
  Rng rng(seed);
  ParameterTree params;
  init_mgan_mixer(params, rng, state_dim, G);
  return params;
}

// Independent reimplementation of the closed form
//   Q_tot = Σ_g |Ww·s + bw|_g · Σ_a softmax(c_g)_a·q_a + (Wb·s + bb)
// in plain doubles with a naive softmax (no max subtraction).
double manual_qtot(const ParameterTree& p, const std::vector<double>& q,
                   const std::vector<std::vector<double>>& c_per_g,
                   const std::vector<double>& state, const std::vector<int>& alive) {
  const RealArray& ww = p.at("mixer.hyper_w.weight");
  const RealArray& bw = p.at("mixer.hyper_w.bias");
  const RealArray& wb = p.at("mixer.hyper_b.weight");
  const RealArray& bb = p.at("mixer.hyper_b.bias");
  const std::size_t G = c_per_g.size();
  double total = 0.0;
  for (std::size_t g = 0; g < G; ++g) {
    double wg = bw.at(g);
    for (std::size_t j = 0; j < state.size(); ++j) wg += ww.at2(g, j) * state[j];
    wg = std::fabs(wg);
    double denom = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) {
      if (alive[a]) denom += std::exp(c_per_g[g][a]);
    }
    double qg = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) {
      if (alive[a]) qg += q[a] * std::exp(c_per_g[g][a]) / denom;
    }
    total += wg * qg;
  }
  double bias = bb.at(0);
  for (std::size_t j = 0; j < state.size(); ++j) bias += wb.at2(0, j) * state[j];
  return total + bias;
}

double eval_qtot(const ParameterTree& params, const std::vector<double>& q,
                 const std::vector<std::vector<double>>& c_per_g,
                 const std::vector<double>& state, const std::vector<int>& alive) {
  Tape t(false);
  Binding bind(t, params);
  const std::size_t n = q.size();
  VarId chosen = t.leaf(row(q));
  std::vector<VarId> scalars;
  for (const auto& c : c_per_g) scalars.push_back(t.leaf(row(c)));
  RealArray am({1, n});
  for (std::size_t a = 0; a < n; ++a) am.at(a) = alive[a] ? 1.0 : 0.0;
  const Shape state_shape{1, state.size()};
  VarId s = t.leaf(RealArray(state_shape, state));
  return t.value(mgan_qtot(t, bind, chosen, scalars, s, am)).at(0);
}

}  // namespace

TEST_CASE("graph_value base cases") {
  Tape t;
  // equal scalars: uniform softmax, so Q_g is the mean
  VarId q = t.leaf(row({1, 2, 3}));
  VarId c = t.leaf(row({0.7, 0.7, 0.7}));
  CHECK(t.value(graph_value(t, q, c, alive_row({1, 1, 1}))).at(0) ==
        doctest::Approx(2.0).epsilon(1e-12));

  // single agent: Q_g = q regardless of c
  VarId q1 = t.leaf(row({-3.5}));
  VarId c1 = t.leaf(row({42.0}));
  CHECK(t.value(graph_value(t, q1, c1, alive_row({1}))).at(0) == doctest::Approx(-3.5));

  // independent direct evaluation for c = [10, 0, 0]
  const double e10 = std::exp(10.0);
  const double denom = e10 + 2.0;
  const double expected = 1.0 * (e10 / denom) + 2.0 / denom + 3.0 / denom;
  VarId q3 = t.leaf(row({1, 2, 3}));
  VarId c3 = t.leaf(row({10, 0, 0}));
  CHECK(t.value(graph_value(t, q3, c3, alive_row({1, 1, 1}))).at(0) ==
        doctest::Approx(expected).epsilon(1e-12));

  // degenerate mask on the single-instance form
  Tape t1;
  VarId qd = t1.leaf(RealArray::vec({1, 2}));
  VarId cd = t1.leaf(RealArray::vec({0, 0}));
  CHECK_THROWS_AS(graph_value(t1, qd, cd, RealArray::vec({0, 0})), DegenerateMaskError);
}

TEST_CASE("credit weights are non-negative and sum to 1 over alive agents") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform_int(0, 4));
    RealArray c({1, n});
    RealArray am({1, n});
    bool any = false;
    for (std::size_t a = 0; a < n; ++a) {
      c.at(a) = rng.uniform(-5, 5);
      am.at(a) = rng.uniform() < 0.7 ? 1.0 : 0.0;
      any = any || am.at(a) == 1.0;
    }
    if (!any) am.at(0) = 1.0;
    Tape t;
    const RealArray& w = t.value(masked_softmax(t, t.leaf(c), am, true));
    double total = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      if (am.at(a) == 0.0) {
        CHECK(w.at(a) == 0.0);
      } else {
        CHECK(w.at(a) > 0.0);
        total += w.at(a);
      }
    }
    CHECK(std::fabs(total - 1.0) <= 1e-9);
  }
}

TEST_CASE("hyper_mix zero params and forced unit weights") {
  {
    ParameterTree params;
    params.add("mixer.hyper_w.weight", RealArray({4, 3}));
    params.add("mixer.hyper_w.bias", RealArray({4}));
    params.add("mixer.hyper_b.weight", RealArray({1, 3}));
    params.add("mixer.hyper_b.bias", RealArray({1}));
    Tape t;
    Binding bind(t, params);
    VarId qg = t.leaf(row({5, -2, 3, 100}));
    VarId s = t.leaf(row({1, 2, 3}));
    CHECK(t.value(hyper_mix(t, bind, s, qg)).at(0) == 0.0);
  }
  {
    // w forced to [1,1,1,1] via the bias path, b = 0: Q_tot = ΣQ_g
    ParameterTree params;
    params.add("mixer.hyper_w.weight", RealArray({4, 3}));
    params.add("mixer.hyper_w.bias", RealArray({4}, {1, 1, 1, 1}));
    params.add("mixer.hyper_b.weight", RealArray({1, 3}));
    params.add("mixer.hyper_b.bias", RealArray({1}));
    Tape t;
    Binding bind(t, params);
    VarId qg = t.leaf(row({5, -2, 3, 100}));
    VarId s = t.leaf(row({1, 2, 3}));
    CHECK(t.value(hyper_mix(t, bind, s, qg)).at(0) == doctest::Approx(106.0));
  }
}

TEST_CASE("numeric dQtot/dQa is non-negative for mgan") {
  Rng rng(7);
  const std::size_t n = 3, G = 4, sdim = 4;
  for (int trial = 0; trial < 200; ++trial) {
    ParameterTree params = mixer_params(sdim, G, rng.next_u64());
    std::vector<double> q(n), state(sdim);
    std::vector<std::vector<double>> c(G, std::vector<double>(n));
    std::vector<int> alive(n, 1);
    for (auto& v : q) v = rng.uniform(-3, 3);
    for (auto& v : state) v = rng.uniform(-2, 2);
    for (auto& cg : c) {
      for (auto& v : cg) v = rng.uniform(-2, 2);
    }
    const double base = eval_qtot(params, q, c, state, alive);
    for (std::size_t a = 0; a < n; ++a) {
      auto bumped = q;
      bumped[a] += 1e-4;
      const double up = eval_qtot(params, bumped, c, state, alive);
      CHECK((up - base) / 1e-4 >= -1e-9);
    }
  }
}

TEST_CASE("q_tot_forward equals the manual closed form") {
  Rng rng(11);
  const std::size_t n = 4, G = 4, sdim = 5;
  for (int trial = 0; trial < 100; ++trial) {
    ParameterTree params = mixer_params(sdim, G, rng.next_u64());
    std::vector<double> q(n), state(sdim);
    std::vector<std::vector<double>> c(G, std::vector<double>(n));
    std::vector<int> alive(n);
    bool any = false;
    for (auto& v : q) v = rng.uniform(-3, 3);
    for (auto& v : state) v = rng.uniform(-2, 2);
    for (auto& cg : c) {
      for (auto& v : cg) v = rng.uniform(-2, 2);
    }
    for (auto& a : alive) {
      a = rng.uniform() < 0.75 ? 1 : 0;
      any = any || a;
    }
    if (!any) alive[0] = 1;
    const double composed = eval_qtot(params, q, c, state, alive);
    const double manual = manual_qtot(params, q, c, state, alive);
    CHECK(std::fabs(composed - manual) < 1e-10);
  }
}

TEST_CASE("equal individual values pass through as k times the weight sum") {
  Rng rng(13);
  const std::size_t n = 3, G = 4, sdim = 3;
  ParameterTree params = mixer_params(sdim, G, 99);
  params.at("mixer.hyper_b.weight") = RealArray({1, sdim});
  params.at("mixer.hyper_b.bias") = RealArray({1});
  const double k = 2.75;
  std::vector<double> q(n, k), state(sdim);
  for (auto& v : state) v = rng.uniform(-2, 2);
  std::vector<std::vector<double>> c(G, std::vector<double>(n));
  for (auto& cg : c) {
    for (auto& v : cg) v = rng.uniform(-2, 2);
  }
  std::vector<int> alive(n, 1);

  double weight_sum = 0.0;
  const RealArray& ww = params.at("mixer.hyper_w.weight");
  const RealArray& bw = params.at("mixer.hyper_w.bias");
  for (std::size_t g = 0; g < G; ++g) {
    double wg = bw.at(g);
    for (std::size_t j = 0; j < sdim; ++j) wg += ww.at2(g, j) * state[j];
    weight_sum += std::fabs(wg);
  }
  CHECK(eval_qtot(params, q, c, state, alive) == doctest::Approx(k * weight_sum).epsilon(1e-12));
}

TEST_CASE("increasing any individual value never decreases Q_tot") {
  Rng rng(17);
  const std::size_t n = 3, G = 2, sdim = 3;
  for (int trial = 0; trial < 50; ++trial) {
    ParameterTree params = mixer_params(sdim, G, rng.next_u64());
    std::vector<double> q(n), state(sdim);
    std::vector<std::vector<double>> c(G, std::vector<double>(n));
    std::vector<int> alive(n, 1);
    for (auto& v : q) v = rng.uniform(-3, 3);
    for (auto& v : state) v = rng.uniform(-2, 2);
    for (auto& cg : c) {
      for (auto& v : cg) v = rng.uniform(-2, 2);
    }
    const double base = eval_qtot(params, q, c, state, alive);
    const std::size_t a = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
    auto bumped = q;
    bumped[a] += rng.uniform(0.0, 5.0);
    CHECK(eval_qtot(params, bumped, c, state, alive) >= base - 1e-12);
  }
}

TEST_CASE("with equal scalars and unit weights Q_tot reduces to (G/n)·VDN") {
  const std::size_t n = 3, G = 4, sdim = 2;
  ParameterTree params;
  params.add("mixer.hyper_w.weight", RealArray({G, sdim}));
  params.add("mixer.hyper_w.bias", RealArray({G}, {1, 1, 1, 1}));
  params.add("mixer.hyper_b.weight", RealArray({1, sdim}));
  params.add("mixer.hyper_b.bias", RealArray({1}));

  std::vector<double> q{1.0, 2.5, -0.5};
  std::vector<std::vector<double>> c(G, std::vector<double>(n, 0.123));
  std::vector<int> alive(n, 1);

  Tape t;
  double vdn = t.value(vdn_mix(t, t.leaf(row(q)))).at(0);
  CHECK(vdn == doctest::Approx(3.0));
  const double qtot = eval_qtot(params, q, c, {0.4, -0.9}, alive);
  CHECK(qtot == doctest::Approx(static_cast<double>(G) / n * vdn).epsilon(1e-12));
}

TEST_CASE("vdn sum and unit gradients") {
  ParameterTree params;
  params.add("q", row({1, 2, 3}));
  Tape t;
  Binding bind(t, params);
  VarId out = vdn_mix(t, bind("q"));
  CHECK(t.value(out).at(0) == 6.0);
  GradMap grads = t.backward(sum_all(t, out));
  for (double g : grads.at("q").values()) CHECK(g == 1.0);
}

TEST_CASE("numeric dQtot/dQa is non-negative for qmix") {
  Rng rng(19);
  const QmixHead head{3, 4, 8};
  for (int trial = 0; trial < 200; ++trial) {
    Rng prng(rng.next_u64());
    ParameterTree params;
    head.init_params(params, prng);
    RealArray q = random_array(rng, {1, 3}, 3.0);
    RealArray s = random_array(rng, {1, 4}, 2.0);

    auto value = [&](const RealArray& qv) {
      Tape t(false);
      Binding bind(t, params);
      return t.value(head.mix(t, bind, t.leaf(qv), t.leaf(s))).at(0);
    };
    const double base = value(q);
    for (std::size_t a = 0; a < 3; ++a) {
      RealArray bumped = q;
      bumped.at(a) += 1e-4;
      CHECK((value(bumped) - base) / 1e-4 >= -1e-9);
    }
  }
}

TEST_CASE("IGM: greedy per-agent actions attain the exhaustive joint max") {
  Rng rng(23);
  for (int n = 2; n <= 3; ++n) {
    for (int U = 2; U <= 4; ++U) {
      for (int trial = 0; trial < 60; ++trial) {
        const std::size_t G = 3, sdim = 3;
        ParameterTree params = mixer_params(sdim, G, rng.next_u64());
        std::vector<std::vector<double>> qtable(n, std::vector<double>(U));
        std::vector<std::vector<std::uint8_t>> avail(n, std::vector<std::uint8_t>(U));
        std::vector<std::vector<double>> c(G, std::vector<double>(n));
        std::vector<double> state(sdim);
        std::vector<int> alive(n, 1);
        for (auto& v : state) v = rng.uniform(-2, 2);
        for (auto& cg : c) {
          for (auto& v : cg) v = rng.uniform(-2, 2);
        }
        for (int a = 0; a < n; ++a) {
          bool any = false;
          for (int u = 0; u < U; ++u) {
            qtable[a][u] = rng.uniform(-3, 3);
            avail[a][u] = rng.uniform() < 0.8 ? 1 : 0;
            any = any || avail[a][u];
          }
          if (!any) avail[a][rng.uniform_int(0, U - 1)] = 1;
        }

        auto qtot_at = [&](const std::vector<int>& joint) {
          std::vector<double> chosen(n);
          for (int a = 0; a < n; ++a) chosen[a] = qtable[a][joint[a]];
          return eval_qtot(params, chosen, c, state, alive);
        };

        std::vector<int> greedy(n);
        for (int a = 0; a < n; ++a) {
          greedy[a] = static_cast<int>(argmax_available(
              std::span<const double>(qtable[a].data(), U),
              std::span<const std::uint8_t>(avail[a].data(), U)));
        }
        const double greedy_value = qtot_at(greedy);

        double joint_max = -1e300;
        std::vector<int> joint(n, 0);
        while (true) {
          bool legal = true;
          for (int a = 0; a < n; ++a) legal = legal && avail[a][joint[a]];
          if (legal) joint_max = std::max(joint_max, qtot_at(joint));
          int d = 0;
          for (; d < n; ++d) {
            if (++joint[d] < U) break;
            joint[d] = 0;
          }
          if (d == n) break;
        }
        CHECK(std::fabs(greedy_value - joint_max) <= 1e-9);
      }
    }
  }
}
