#include "mgan/tape.hpp"

#include <algorithm>
#include <cmath>

namespace mgan {

void Tape::require_live(const char* what) const {
  if (consumed_) {
    throw std::logic_error(std::string(what) + ": tape already consumed by backward()");
  }
}

VarId Tape::leaf(RealArray value) {
  require_live("leaf");
  value.require_finite("leaf");
  nodes_.push_back(Node{std::move(value), {}, "leaf", {}, {}});
  return static_cast<VarId>(nodes_.size() - 1);
}

VarId Tape::param(RealArray value, std::string name) {
  require_live("param");
  value.require_finite(("param " + name).c_str());
  nodes_.push_back(Node{std::move(value), {}, "param", std::move(name), {}});
  return static_cast<VarId>(nodes_.size() - 1);
}

VarId Tape::record(const char* op, RealArray value, BackFn back) {
  require_live(op);
  nodes_.push_back(Node{std::move(value), {}, op, {}, grad_enabled_ ? std::move(back) : BackFn{}});
  return static_cast<VarId>(nodes_.size() - 1);
}

RealArray& Tape::grad_buffer(VarId id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = RealArray(n.value.shape());
  return n.grad;
}

GradMap Tape::backward(VarId output, const ParameterTree* all_params) {
  require_live("backward");
  if (!grad_enabled_) {
    throw std::logic_error("backward: tape was built with gradients disabled");
  }
  if (value(output).numel() != 1) {
    throw std::invalid_argument("backward: output must be a scalar, got shape " +
                                shape_to_string(value(output).shape()));
  }
  consumed_ = true;
  grad_buffer(output).at(0) = 1.0;

  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (n.back && !n.grad.empty()) n.back(*this, static_cast<VarId>(i));
  }

  GradMap grads;
  for (const Node& n : nodes_) {
    if (n.param_name.empty()) continue;
    if (!n.grad.empty()) {
      grads[n.param_name] = n.grad;
    } else {
      grads[n.param_name] = RealArray(n.value.shape());
    }
  }
  if (all_params) {
    for (const auto& [name, e] : *all_params) {
      if (e.trainable && !grads.count(name)) grads[name] = RealArray(e.value.shape());
    }
  }
  return grads;
}

void Tape::reset() {
  nodes_.clear();
  consumed_ = false;
}

std::size_t Tape::count_ops(std::string_view op) const {
  std::size_t n = 0;
  for (const auto& node : nodes_) {
    if (op == node.op) ++n;
  }
  return n;
}

VarId Binding::operator()(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  const auto& e = params_->entry(name);
  VarId id = e.trainable ? tape_->param(e.value, name) : tape_->leaf(e.value);
  bound_.emplace(name, id);
  return id;
}

// ---- ops ----------------------------------------------------------------

VarId linear(Tape& t, VarId x, VarId w, VarId b) {
  const RealArray& X = t.value(x);
  const RealArray& W = t.value(w);
  const RealArray& B = t.value(b);
  require_rank(X, 2, "linear input");
  require_rank(W, 2, "linear weight");
  if (X.cols() != W.cols()) {
    throw ShapeError("linear: input " + shape_to_string(X.shape()) +
                     " does not match weight " + shape_to_string(W.shape()));
  }
  const std::size_t rows = X.rows(), in = X.cols(), out = W.rows();
  if (B.numel() != out) {
    throw ShapeError("linear: bias " + shape_to_string(B.shape()) + " does not match weight " +
                     shape_to_string(W.shape()));
  }

  RealArray Y({rows, out});
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = X.data() + r * in;
    double* yr = Y.data() + r * out;
    for (std::size_t o = 0; o < out; ++o) {
      const double* wo = W.data() + o * in;
      double acc = B.at(o);
      for (std::size_t i = 0; i < in; ++i) acc += xr[i] * wo[i];
      yr[o] = acc;
    }
  }

  return t.record("linear", std::move(Y), [x, w, b, rows, in, out](Tape& tp, VarId self) {
    const RealArray& G = tp.grad(self);
    const RealArray& X = tp.value(x);
    const RealArray& W = tp.value(w);
    RealArray& dX = tp.grad_buffer(x);
    RealArray& dW = tp.grad_buffer(w);
    RealArray& dB = tp.grad_buffer(b);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* gr = G.data() + r * out;
      const double* xr = X.data() + r * in;
      double* dxr = dX.data() + r * in;
      for (std::size_t o = 0; o < out; ++o) {
        const double g = gr[o];
        if (g == 0.0) continue;
        const double* wo = W.data() + o * in;
        double* dwo = dW.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) {
          dxr[i] += g * wo[i];
          dwo[i] += g * xr[i];
        }
        dB.at(o) += g;
      }
    }
  });
}

namespace {

template <typename Fwd, typename Bwd>
VarId unary_op(Tape& t, VarId x, const char* name, Fwd fwd, Bwd bwd) {
  const RealArray& X = t.value(x);
  RealArray Y(X.shape());
  for (std::size_t i = 0; i < X.numel(); ++i) Y.at(i) = fwd(X.at(i));
  return t.record(name, std::move(Y), [x, bwd](Tape& tp, VarId self) {
    const RealArray& G = tp.grad(self);
    const RealArray& X = tp.value(x);
    const RealArray& Y = tp.value(self);
    RealArray& dX = tp.grad_buffer(x);
    for (std::size_t i = 0; i < G.numel(); ++i) dX.at(i) += G.at(i) * bwd(X.at(i), Y.at(i));
  });
}

}  // namespace

VarId relu(Tape& t, VarId x) {
  return unary_op(
      t, x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

VarId sigmoid(Tape& t, VarId x) {
  return unary_op(
      t, x, "sigmoid", [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double y) { return y * (1.0 - y); });
}

VarId tanh_op(Tape& t, VarId x) {
  return unary_op(
      t, x, "tanh", [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

VarId elu(Tape& t, VarId x) {
  return unary_op(
      t, x, "elu", [](double v) { return v > 0.0 ? v : std::expm1(v); },
      [](double v, double y) { return v > 0.0 ? 1.0 : y + 1.0; });
}

VarId abs_op(Tape& t, VarId x) {
  return unary_op(
      t, x, "abs", [](double v) { return std::fabs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

namespace {

template <typename Combine, typename BwdA, typename BwdB>
VarId binary_op(Tape& t, VarId a, VarId b, const char* name, Combine fwd, BwdA da, BwdB db) {
  const RealArray& A = t.value(a);
  const RealArray& B = t.value(b);
  require_same_shape(A, B, name);
  RealArray Y(A.shape());
  for (std::size_t i = 0; i < A.numel(); ++i) Y.at(i) = fwd(A.at(i), B.at(i));
  return t.record(name, std::move(Y), [a, b, da, db](Tape& tp, VarId self) {
    const RealArray& G = tp.grad(self);
    const RealArray& A = tp.value(a);
    const RealArray& B = tp.value(b);
    RealArray& dA = tp.grad_buffer(a);
    RealArray& dB = tp.grad_buffer(b);
    for (std::size_t i = 0; i < G.numel(); ++i) {
      dA.at(i) += G.at(i) * da(A.at(i), B.at(i));
      dB.at(i) += G.at(i) * db(A.at(i), B.at(i));
    }
  });
}

}  // namespace

VarId add(Tape& t, VarId a, VarId b) {
  return binary_op(
      t, a, b, "add", [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

VarId sub(Tape& t, VarId a, VarId b) {
  return binary_op(
      t, a, b, "sub", [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

VarId mul(Tape& t, VarId a, VarId b) {
  return binary_op(
      t, a, b, "mul", [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

VarId scale(Tape& t, VarId x, double k) {
  return unary_op(
      t, x, "scale", [k](double v) { return k * v; }, [k](double, double) { return k; });
}

VarId add_const(Tape& t, VarId x, double k) {
  return unary_op(
      t, x, "add_const", [k](double v) { return v + k; }, [](double, double) { return 1.0; });
}

VarId concat_cols(Tape& t, VarId a, VarId b) {
  const RealArray& A = t.value(a);
  const RealArray& B = t.value(b);
  require_rank(A, 2, "concat");
  require_rank(B, 2, "concat");
  if (A.rows() != B.rows()) {
    throw ShapeError("concat: leading dims differ, " + shape_to_string(A.shape()) + " vs " +
                     shape_to_string(B.shape()));
  }
  const std::size_t n = A.rows(), p = A.cols(), q = B.cols();
  RealArray Y({n, p + q});
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(A.data() + r * p, p, Y.data() + r * (p + q));
    std::copy_n(B.data() + r * q, q, Y.data() + r * (p + q) + p);
  }
  return t.record("concat", std::move(Y), [a, b, n, p, q](Tape& tp, VarId self) {
    const RealArray& G = tp.grad(self);
    RealArray& dA = tp.grad_buffer(a);
    RealArray& dB = tp.grad_buffer(b);
    for (std::size_t r = 0; r < n; ++r) {
      const double* gr = G.data() + r * (p + q);
      for (std::size_t i = 0; i < p; ++i) dA.at(r * p + i) += gr[i];
      for (std::size_t i = 0; i < q; ++i) dB.at(r * q + i) += gr[p + i];
    }
  });
}

VarId slice_cols(Tape& t, VarId x, std::size_t begin, std::size_t end) {
  const RealArray& X = t.value(x);
  require_rank(X, 2, "slice_cols");
  if (begin > end || end > X.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") out of range for " + shape_to_string(X.shape()));
  }
  const std::size_t n = X.rows(), c = X.cols(), w = end - begin;
  RealArray Y({n, w});
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(X.data() + r * c + begin, w, Y.data() + r * w);
  }
  return t.record("slice_cols", std::move(Y), [x, begin, n, c, w](Tape& tp, VarId self) {
    const RealArray& G = tp.grad(self);
    RealArray& dX = tp.grad_buffer(x);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t i = 0; i < w; ++i) dX.at(r * c + begin + i) += G.at(r * w + i);
    }
  });
}

VarId reshape(Tape& t, VarId x, Shape shape) {
  const RealArray& X = t.value(x);
  RealArray Y(shape, std::vector<double>(X.values().begin(), X.values().end()));
  return t.record("reshape", std::move(Y), [x](Tape& tp, VarId self) {
    const RealArray& G = tp.grad(self);
    RealArray& dX = tp.grad_buffer(x);
    for (std::size_t i = 0; i < G.numel(); ++i) dX.at(i) += G.at(i);
  });
}

VarId matmul(Tape& t, VarId a, VarId b) {
  const RealArray& A = t.value(a);
  const RealArray& B = t.value(b);
  require_rank(A, 2, "matmul");
  require_rank(B, 2, "matmul");
  if (A.cols() != B.rows()) {
    throw ShapeError("matmul: inner dims differ, " + shape_to_string(A.shape()) + " vs " +
                     shape_to_string(B.shape()));
  }
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  RealArray Y({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double* yi = Y.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A.at2(i, p);
      if (aip == 0.0) continue;
      const double* bp = B.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) yi[j] += aip * bp[j];
    }
  }
  return t.record("matmul", std::move(Y), [a, b, m, k, n](Tape& tp, VarId self) {
    const RealArray& G = tp.grad(self);
    const RealArray& A = tp.value(a);
    const RealArray& B = tp.value(b);
    RealArray& dA = tp.grad_buffer(a);
    RealArray& dB = tp.grad_buffer(b);
    for (std::size_t i = 0; i < m; ++i) {
      const double* gi = G.data() + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const double* bp = B.data() + p * n;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += gi[j] * bp[j];
        dA.at(i * k + p) += acc;
        const double aip = A.at(i * k + p);
        if (aip == 0.0) continue;
        double* dbp = dB.data() + p * n;
        for (std::size_t j = 0; j < n; ++j) dbp[j] += aip * gi[j];
      }
    }
  });
}

VarId matmul_nt(Tape& t, VarId a, VarId b) {
  const RealArray& A = t.value(a);
  const RealArray& B = t.value(b);
  require_rank(A, 2, "matmul_nt");
  require_rank(B, 2, "matmul_nt");
  if (A.cols() != B.cols()) {
    throw ShapeError("matmul_nt: inner dims differ, " + shape_to_string(A.shape()) + " vs " +
                     shape_to_string(B.shape()));
  }
  const std::size_t m = A.rows(), k = A.cols(), n = B.rows();
  RealArray Y({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = A.data() + i * k;
    double* yi = Y.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = B.data() + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
      yi[j] = acc;
    }
  }
  return t.record("matmul_nt", std::move(Y), [a, b, m, k, n](Tape& tp, VarId self) {
    const RealArray& G = tp.grad(self);
    const RealArray& A = tp.value(a);
    const RealArray& B = tp.value(b);
    RealArray& dA = tp.grad_buffer(a);
    RealArray& dB = tp.grad_buffer(b);
    for (std::size_t i = 0; i < m; ++i) {
      const double* gi = G.data() + i * n;
      const double* ai = A.data() + i * k;
      double* dai = dA.data() + i * k;
      for (std::size_t j = 0; j < n; ++j) {
        const double g = gi[j];
        if (g == 0.0) continue;
        const double* bj = B.data() + j * k;
        double* dbj = dB.data() + j * k;
        for (std::size_t p = 0; p < k; ++p) {
          dai[p] += g * bj[p];
          dbj[p] += g * ai[p];
        }
      }
    }
  });
}

VarId row_sum(Tape& t, VarId x) {
  const RealArray& X = t.value(x);
  require_rank(X, 2, "row_sum");
  const std::size_t m = X.rows(), n = X.cols();
  RealArray Y({m});
  for (std::size_t r = 0; r < m; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) acc += X.at2(r, c);
    Y.at(r) = acc;
  }
  return t.record("row_sum", std::move(Y), [x, m, n](Tape& tp, VarId self) {
    const RealArray& G = tp.grad(self);
    RealArray& dX = tp.grad_buffer(x);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < n; ++c) dX.at(r * n + c) += G.at(r);
    }
  });
}

VarId sum_all(Tape& t, VarId x) {
  const RealArray& X = t.value(x);
  double acc = 0.0;
  for (double v : X.values()) acc += v;
  return t.record("sum_all", RealArray::scalar(acc), [x](Tape& tp, VarId self) {
    const double g = tp.grad(self).at(0);
    RealArray& dX = tp.grad_buffer(x);
    for (std::size_t i = 0; i < dX.numel(); ++i) dX.at(i) += g;
  });
}

VarId weighted_sum(Tape& t, VarId x, RealArray weights) {
  const RealArray& X = t.value(x);
  require_same_shape(X, weights, "weighted_sum");
  double acc = 0.0;
  for (std::size_t i = 0; i < X.numel(); ++i) acc += X.at(i) * weights.at(i);
  return t.record("weighted_sum", RealArray::scalar(acc),
                  [x, w = std::move(weights)](Tape& tp, VarId self) {
                    const double g = tp.grad(self).at(0);
                    RealArray& dX = tp.grad_buffer(x);
                    for (std::size_t i = 0; i < dX.numel(); ++i) dX.at(i) += g * w.at(i);
                  });
}

VarId gather_cols(Tape& t, VarId x, std::vector<std::size_t> idx) {
  const RealArray& X = t.value(x);
  require_rank(X, 2, "gather_cols");
  if (idx.size() != X.rows()) {
    throw ShapeError("gather_cols: " + std::to_string(idx.size()) + " indices for " +
                     shape_to_string(X.shape()));
  }
  const std::size_t m = X.rows(), n = X.cols();
  RealArray Y({m});
  for (std::size_t r = 0; r < m; ++r) {
    if (idx[r] >= n) throw std::out_of_range("gather_cols: index out of range");
    Y.at(r) = X.at2(r, idx[r]);
  }
  return t.record("gather_cols", std::move(Y), [x, idx = std::move(idx), n](Tape& tp, VarId self) {
    const RealArray& G = tp.grad(self);
    RealArray& dX = tp.grad_buffer(x);
    for (std::size_t r = 0; r < G.numel(); ++r) dX.at(r * n + idx[r]) += G.at(r);
  });
}

VarId stack_cols(Tape& t, std::span<const VarId> columns) {
  if (columns.empty()) throw std::invalid_argument("stack_cols: no columns");
  const std::size_t m = t.value(columns[0]).numel();
  const std::size_t k = columns.size();
  RealArray Y({m, k});
  for (std::size_t j = 0; j < k; ++j) {
    const RealArray& C = t.value(columns[j]);
    if (C.numel() != m) {
      throw ShapeError("stack_cols: column " + std::to_string(j) + " has shape " +
                       shape_to_string(C.shape()));
    }
    for (std::size_t r = 0; r < m; ++r) Y.at2(r, j) = C.at(r);
  }
  std::vector<VarId> cols(columns.begin(), columns.end());
  return t.record("stack_cols", std::move(Y), [cols = std::move(cols), m, k](Tape& tp, VarId self) {
    const RealArray& G = tp.grad(self);
    for (std::size_t j = 0; j < k; ++j) {
      RealArray& dC = tp.grad_buffer(cols[j]);
      for (std::size_t r = 0; r < m; ++r) dC.at(r) += G.at(r * k + j);
    }
  });
}

VarId masked_softmax(Tape& t, VarId logits, RealArray mask, bool allow_empty_rows) {
  const RealArray& X = t.value(logits);
  require_same_shape(X, mask, "masked_softmax");
  X.require_finite("masked_softmax");
  const bool vector_input = X.rank() == 1;
  const std::size_t rows = vector_input ? 1 : X.rows();
  const std::size_t n = vector_input ? X.numel() : X.cols();

  RealArray Y(X.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = X.data() + r * n;
    const double* mr = mask.data() + r * n;
    double* yr = Y.data() + r * n;
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (mr[i] != 0.0 && xr[i] > hi) hi = xr[i];
    }
    if (hi == -std::numeric_limits<double>::infinity()) {
      if (!allow_empty_rows) {
        throw DegenerateMaskError("masked_softmax: mask row " + std::to_string(r) +
                                  " has no live entries");
      }
      continue;  // row stays zero
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mr[i] != 0.0) {
        yr[i] = std::exp(xr[i] - hi);
        total += yr[i];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (mr[i] != 0.0) yr[i] /= total;
    }
  }

  return t.record("masked_softmax", std::move(Y),
                  [logits, m = std::move(mask), rows, n](Tape& tp, VarId self) {
                    const RealArray& G = tp.grad(self);
                    const RealArray& Y = tp.value(self);
                    RealArray& dX = tp.grad_buffer(logits);
                    for (std::size_t r = 0; r < rows; ++r) {
                      const double* gr = G.data() + r * n;
                      const double* yr = Y.data() + r * n;
                      const double* mr = m.data() + r * n;
                      double inner = 0.0;
                      for (std::size_t i = 0; i < n; ++i) inner += gr[i] * yr[i];
                      double* dxr = dX.data() + r * n;
                      for (std::size_t i = 0; i < n; ++i) {
                        if (mr[i] != 0.0) dxr[i] += yr[i] * (gr[i] - inner);
                      }
                    }
                  });
}

VarId attention_aggregate(Tape& t, VarId feats, const RealArray& adjacency) {
  const RealArray& H = t.value(feats);
  require_rank(H, 2, "attention_aggregate");
  require_rank(adjacency, 3, "attention_aggregate adjacency");
  const std::size_t B = adjacency.dim(0), n = adjacency.dim(1), d = H.cols();
  if (adjacency.dim(2) != n || H.rows() != B * n) {
    throw ShapeError("attention_aggregate: features " + shape_to_string(H.shape()) +
                     " do not match adjacency " + shape_to_string(adjacency.shape()));
  }
  H.require_finite("attention_aggregate");

  // Attention weights are kept for the backward pass.
  RealArray W({B, n, n});
  RealArray Y({B * n, d});
  std::vector<double> dots(n);
  for (std::size_t b = 0; b < B; ++b) {
    const double* Hb = H.data() + b * n * d;
    for (std::size_t v = 0; v < n; ++v) {
      const double* hv = Hb + v * d;
      double hi = -std::numeric_limits<double>::infinity();
      bool any = false;
      for (std::size_t u = 0; u < n; ++u) {
        if (adjacency.at3(b, v, u) == 0.0) continue;
        const double* hu = Hb + u * d;
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) s += hv[i] * hu[i];
        dots[u] = s;
        any = true;
        if (s > hi) hi = s;
      }
      if (!any) continue;  // no neighbours: output row stays zero
      double total = 0.0;
      for (std::size_t u = 0; u < n; ++u) {
        if (adjacency.at3(b, v, u) == 0.0) continue;
        const double e = std::exp(dots[u] - hi);
        W.at3(b, v, u) = e;
        total += e;
      }
      double* yv = Y.data() + (b * n + v) * d;
      for (std::size_t u = 0; u < n; ++u) {
        if (adjacency.at3(b, v, u) == 0.0) continue;
        const double wvu = W.at3(b, v, u) / total;
        W.at3(b, v, u) = wvu;
        const double* hu = Hb + u * d;
        for (std::size_t i = 0; i < d; ++i) yv[i] += wvu * hu[i];
      }
    }
  }

  return t.record(
      "attention_aggregate", std::move(Y),
      [feats, adj = adjacency, W = std::move(W), B, n, d](Tape& tp, VarId self) {
        const RealArray& G = tp.grad(self);
        const RealArray& H = tp.value(feats);
        RealArray& dH = tp.grad_buffer(feats);
        std::vector<double> dWrow(n), dSrow(n);
        for (std::size_t b = 0; b < B; ++b) {
          const double* Hb = H.data() + b * n * d;
          double* dHb = dH.data() + b * n * d;
          for (std::size_t v = 0; v < n; ++v) {
            const double* gv = G.data() + (b * n + v) * d;
            // dW[v][u] = g_v · h_u ; dH[u] += w[v][u] * g_v
            double inner = 0.0;
            for (std::size_t u = 0; u < n; ++u) {
              const double wvu = W.at3(b, v, u);
              if (adj.at3(b, v, u) == 0.0) {
                dWrow[u] = 0.0;
                continue;
              }
              const double* hu = Hb + u * d;
              double s = 0.0;
              for (std::size_t i = 0; i < d; ++i) s += gv[i] * hu[i];
              dWrow[u] = s;
              inner += wvu * s;
              double* dhu = dHb + u * d;
              for (std::size_t i = 0; i < d; ++i) dhu[i] += wvu * gv[i];
            }
            // softmax backward, then dS routed through both sides of h_v·h_u
            const double* hv = Hb + v * d;
            double* dhv = dHb + v * d;
            for (std::size_t u = 0; u < n; ++u) {
              if (adj.at3(b, v, u) == 0.0) continue;
              const double ds = W.at3(b, v, u) * (dWrow[u] - inner);
              if (ds == 0.0) continue;
              const double* hu = Hb + u * d;
              double* dhu = dHb + u * d;
              for (std::size_t i = 0; i < d; ++i) {
                dhv[i] += ds * hu[i];
                dhu[i] += ds * hv[i];
              }
            }
          }
        }
      });
}

std::size_t argmax_available(std::span<const double> q, std::span<const std::uint8_t> avail) {
  if (q.size() != avail.size()) {
    throw ShapeError("argmax_available: " + std::to_string(q.size()) + " values vs " +
                     std::to_string(avail.size()) + " avail flags");
  }
  std::size_t best = q.size();
  double best_v = 0.0;
  bool any_avail = false;
  for (std::size_t i = 0; i < q.size(); ++i) {
    any_avail = any_avail || avail[i] != 0;
    const double v = avail[i] ? q[i] : -1e9;
    if (best == q.size() || v > best_v) {
      best = i;
      best_v = v;
    }
  }
  if (!any_avail) throw std::invalid_argument("argmax_available: no available action");
  return best;
}

}  // namespace mgan
