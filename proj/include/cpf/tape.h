#ifndef CPF_TAPE_H
#define CPF_TAPE_H

#include <deque>
#include <functional>
#include <vector>

#include "cpf/parameter.h"
#include "cpf/tensor.h"

namespace cpf {

/// Handle to a value recorded on a Tape.
struct Value {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode differentiation tape.
///
/// Operations append nodes in topological order (inputs always precede
/// consumers); backward() walks the record in exact reverse order and
/// accumulates gradients. Parameters are external leaves: ops that read a
/// Parameter write straight into Parameter::grad, so after backward() the
/// caller finds d(loss)/d(theta) in each parameter it passed in. Gradients
/// accumulate across backward calls until the caller zeroes them.
///
/// A tape is single-threaded and intended to be built, differentiated and
/// discarded per forward pass.
class Tape {
public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf with no gradient tracking.
  Value constant(Tensor t);

  /// Load a whole parameter tensor as a differentiable node.
  Value param(Parameter& p);

  /// Row lookup into an embedding table (vector of length cols).
  Value embed(Parameter& table, int row);
  /// Mean of several table rows; empty row set yields a zero vector.
  Value embed_mean(Parameter& table, const std::vector<int>& rows);
  /// Weighted mean over all table rows, weights need not be normalized.
  Value embed_weighted_mean(Parameter& table, const std::vector<real_t>& weights);

  /// y = x W + b with x:[m], W:[m x n], b:[n].
  Value linear(Value x, Parameter& W, Parameter& b);

  /// Per-row gate over a state matrix: out[k] = sigmoid((h[k] (+) tail) W + b).
  /// h:[K x d], tail:[m], W:[(d+m) x n], b:[n], out:[K x n].
  Value row_gate_sigmoid(Value h, Value tail, Parameter& W, Parameter& b);

  Value concat(const std::vector<Value>& parts);
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value mul(Value a, Value b);  // elementwise
  Value scale(Value a, real_t c);
  /// Broadcast-add a scalar node to every entry of a tensor node.
  Value add_scalar(Value v, Value s);

  Value sigmoid(Value v);
  Value tanh_act(Value v);
  /// Stable softmax over a vector; throws on empty input.
  Value softmax(Value v);

  Value dot(Value a, Value b);
  Value l2_norm(Value v);
  /// Scalar division a / b.
  Value div(Value a, Value b);

  /// sum_i weights[i] * vectors[i]; all vectors share one shape,
  /// weights is a vector node of matching length.
  Value weighted_sum(const std::vector<Value>& vectors, Value weights);

  /// weights^T M for constant weights:[K], M:[K x d] -> [d].
  Value pool_rows(const Tensor& weights, Value matrix);
  /// Outer product of constant weights:[K] with a vector node:[d] -> [K x d].
  Value outer_rows(const Tensor& weights, Value vec);

  /// Elementwise multiply by a constant mask (inverted-dropout style masks
  /// are pre-scaled by the caller).
  Value apply_mask(Value v, Tensor mask);

  /// Sum of binary cross-entropy terms over scalar predictions.
  /// Predictions are clamped to [1e-7, 1 - 1e-7] before the logs.
  Value bce_sum(const std::vector<Value>& preds, const std::vector<real_t>& labels);

  /// Value of a recorded node. The reference stays valid for the tape's
  /// lifetime, including across later op recordings.
  const Tensor& val(Value v) const;

  /// Seed d(loss)/d(loss) = 1 and propagate in reverse topological order.
  /// Throws if the loss node is not a single element.
  void backward(Value loss);

  size_t node_count() const { return nodes_.size(); }

private:
  struct Node {
    Tensor val;
    Tensor grad;  // allocated lazily during backward
    bool needs_grad = false;
    std::function<void(Tape&, int)> back;  // nullptr for leaves
  };

  Value push(Tensor val, bool needs_grad, std::function<void(Tape&, int)> back);
  Node& node(int id) { return nodes_[static_cast<size_t>(id)]; }
  const Node& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
  bool needs(Value v) const { return node(v.id).needs_grad; }

  /// Gradient buffer of a node, allocated (zeroed) on first touch.
  Tensor& grad_buf(int id);
  bool has_grad(int id) const { return !node(id).grad.empty(); }

  // deque keeps node references stable while ops keep recording
  std::deque<Node> nodes_;

  friend struct TapeOps;
};

}  // namespace cpf

#endif
