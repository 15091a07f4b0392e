#pragma once

#include <functional>
#include <vector>

#include "permurank/tensor.hpp"

namespace permurank {

class Tape;

/// Handle to a node on a tape. Cheap to copy; invalid once the tape is gone.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const Tensor& value() const;
};

/// Record of one forward pass. Nodes are appended in evaluation order, which
/// is already a topological order of the DAG; the reverse sweep walks it
/// backwards. A tape is rebuilt per forward pass and is confined to one
/// thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that participates in gradient computation.
  Var leaf(Tensor value);

  /// Leaf that is treated as a constant; no gradient is ever computed for it
  /// and backward sweeps do not traverse into it.
  Var constant(Tensor value);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }

  /// Gradient of the last backward() output w.r.t. node v. Zero tensor for
  /// nodes the output does not depend on.
  const Tensor& grad(Var v) const;

  /// Reverse sweep from a scalar output. Gradients of all grad-requiring
  /// nodes are (re)computed; outputs with more than one element are rejected.
  void backward(Var output);

  std::size_t size() const { return nodes_.size(); }

  // --- internal, used by the primitive implementations ---
  struct Node {
    Tensor value;
    Tensor grad;  // allocated during backward
    bool requires_grad = false;
    bool grad_ready = false;
    // Pulls this node's gradient into its parents' gradients.
    std::function<void(Tape&)> pull;
  };

  Var emit(Tensor value, bool requires_grad, std::function<void(Tape&)> pull);
  Node& node(int id) { return nodes_[id]; }
  const Node& node(int id) const { return nodes_[id]; }
  Tensor& grad_slot(int id);

 private:
  std::vector<Node> nodes_;
  Tensor zero_;  // returned for constants / untouched nodes
};

// ---------------------------------------------------------------------------
// Primitives. Shape mismatches throw std::invalid_argument; domain violations
// (log of non-positive input) throw std::domain_error.
// ---------------------------------------------------------------------------

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);               // elementwise
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var add_rowvec(Var a, Var rowvec);   // (m x n) + (1 x n), broadcast over rows
Var mul_rowvec(Var a, Var rowvec);
Var concat_cols(Var a, Var b);       // concat along the last axis
Var concat_rows(Var a, Var b);
Var slice_cols(Var a, int start, int len);
Var select_rows(Var a, std::vector<int> indices);  // gather; backward scatter-adds
Var sum(Var a);
Var mean(Var a);
Var exp(Var a);
Var log(Var a);
Var abs(Var a);                      // subgradient 0 at x = 0
Var sigmoid(Var a);
Var tanh(Var a);
Var softplus(Var a);                 // log(1 + e^x), overflow-safe
Var softmax_rows(Var a);             // stable: subtracts the row max
Var layer_norm_rows(Var a, double eps = 1e-5);
Var detach(Var a);                   // value pass-through, no gradient

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator*(double c, Var a) { return scale(a, c); }

/// log(sum(exp(x))) over all entries, stabilized by the detached max.
Var logsumexp(Var a);

}  // namespace permurank
