#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "mgan/array.hpp"
#include "mgan/params.hpp"

namespace mgan {

using VarId = std::uint32_t;

// Single-use reverse-mode tape. Every differentiable op records its output
// value plus a closure that pushes adjoints back to its inputs; backward()
// replays the closures exactly once, in reverse execution order.
//
// A tape built with grad_enabled=false stores values only. That is the mode
// used for rollouts, TD targets and evaluation, where reset() lets one tape
// be reused across steps without reallocation churn.
class Tape {
 public:
  using BackFn = std::function<void(Tape&, VarId)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  bool grad_enabled() const { return grad_enabled_; }

  // Constant input; never receives a gradient.
  VarId leaf(RealArray value);

  // Trainable leaf. Gradients accumulate here and come back out of
  // backward() keyed by name. Repeated params must be bound once per tape
  // (see Binding) so that shared use accumulates into a single node.
  VarId param(RealArray value, std::string name);

  const RealArray& value(VarId id) const { return nodes_[id].value; }

  // Valid after backward(); zero-shaped if the node never received adjoints.
  const RealArray& grad(VarId id) const { return nodes_[id].grad; }

  // Accumulation target for backprop closures; allocates zeros on first use.
  RealArray& grad_buffer(VarId id);

  VarId record(const char* op, RealArray value, BackFn back);

  // Reverse accumulation from a scalar output. Returns gradients for every
  // trainable parameter touched on this tape; if `all_params` is given,
  // trainable entries that never participated get explicit zero gradients.
  // The tape is consumed afterwards.
  GradMap backward(VarId output, const ParameterTree* all_params = nullptr);

  // Drops all nodes; the tape becomes reusable.
  void reset();

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t count_ops(std::string_view op) const;

 private:
  struct Node {
    RealArray value;
    RealArray grad;
    const char* op;
    std::string param_name;  // nonempty for trainable leaves
    BackFn back;
  };

  void require_live(const char* what) const;

  std::vector<Node> nodes_;
  bool grad_enabled_ = true;
  bool consumed_ = false;
};

// Binds ParameterTree entries onto a tape, one node per name.
class Binding {
 public:
  Binding(Tape& tape, const ParameterTree& params) : tape_(&tape), params_(&params) {}

  VarId operator()(const std::string& name);
  const ParameterTree& params() const { return *params_; }
  Tape& tape() const { return *tape_; }

 private:
  Tape* tape_;
  const ParameterTree* params_;
  std::map<std::string, VarId> bound_;
};

// ---- primitive ops ----------------------------------------------------
// All ops validate shapes and record on the tape; forward results are pure
// functions of their inputs.

// y = x·Wᵀ + b  with x:[r×in], W:[out×in], b:[out]
VarId linear(Tape& t, VarId x, VarId w, VarId b);

VarId relu(Tape& t, VarId x);
VarId sigmoid(Tape& t, VarId x);
VarId tanh_op(Tape& t, VarId x);
VarId elu(Tape& t, VarId x);
VarId abs_op(Tape& t, VarId x);  // subgradient at 0 is 0

VarId add(Tape& t, VarId a, VarId b);
VarId sub(Tape& t, VarId a, VarId b);
VarId mul(Tape& t, VarId a, VarId b);
VarId scale(Tape& t, VarId x, double k);
VarId add_const(Tape& t, VarId x, double k);

// Row-wise concatenation [n×p] ++ [n×q] -> [n×(p+q)]
VarId concat_cols(Tape& t, VarId a, VarId b);
VarId slice_cols(Tape& t, VarId x, std::size_t begin, std::size_t end);
VarId reshape(Tape& t, VarId x, Shape shape);

VarId matmul(Tape& t, VarId a, VarId b);     // [m×k]·[k×n]
VarId matmul_nt(Tape& t, VarId a, VarId b);  // [m×k]·[n×k]ᵀ

VarId row_sum(Tape& t, VarId x);                         // [m×n] -> [m]
VarId sum_all(Tape& t, VarId x);                         // -> [1]
VarId weighted_sum(Tape& t, VarId x, RealArray weights);  // Σ x∘w -> [1], w constant

// y[r] = x[r][idx[r]]
VarId gather_cols(Tape& t, VarId x, std::vector<std::size_t> idx);
// k vectors of length m -> [m×k]
VarId stack_cols(Tape& t, std::span<const VarId> columns);

// Numerically stable softmax over entries with mask==1; masked entries are
// exactly 0. Accepts [n] or row-wise [m×n]; mask is a constant 0/1 array of
// the same shape. An all-zero mask row raises DegenerateMaskError unless
// allow_empty_rows, in which case the row comes out all zero.
VarId masked_softmax(Tape& t, VarId logits, RealArray mask, bool allow_empty_rows = false);

// Dot-product attention over each node's neighbourhood, batched over B
// independent graphs. feats:[B·n×d], adjacency:{B,n,n} constant 0/1.
// Row v of graph b becomes Σ_u softmax_u(h_v·h_u)·h_u over its neighbours;
// rows with no neighbours come out zero.
VarId attention_aggregate(Tape& t, VarId feats, const RealArray& adjacency);

// Non-tape helper shared with action selection: argmax over available
// entries, unavailable ones masked to -1e9, lowest index wins ties.
std::size_t argmax_available(std::span<const double> q, std::span<const std::uint8_t> avail);

}  // namespace mgan
