#include "permurank/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace permurank {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void require_same_tape(Var a, Var b) {
  require(a.tape == b.tape, "autodiff: operands live on different tapes");
}

bool needs_grad(Var a) { return a.tape->node(a.id).requires_grad; }
bool needs_grad(Var a, Var b) { return needs_grad(a) || needs_grad(b); }

/// Emits a node whose pull closure receives the output node id, so it can
/// read its own gradient before scattering into the parents.
Var emit_op(Tape* t, Tensor value, bool requires_grad,
            std::function<void(Tape&, int)> pull) {
  Var out = t->emit(std::move(value), requires_grad, nullptr);
  if (requires_grad && pull) {
    int oid = out.id;
    t->node(oid).pull = [oid, pull = std::move(pull)](Tape& tp) { pull(tp, oid); };
  }
  return out;
}

}  // namespace

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::leaf(Tensor value) {
  return emit(std::move(value), /*requires_grad=*/true, nullptr);
}

Var Tape::constant(Tensor value) {
  return emit(std::move(value), /*requires_grad=*/false, nullptr);
}

Var Tape::emit(Tensor value, bool requires_grad, std::function<void(Tape&)> pull) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.pull = std::move(pull);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Tensor& Tape::grad_slot(int id) {
  Node& n = nodes_[id];
  if (!n.grad_ready) {
    n.grad = Tensor::zeros(n.value.shape());
    n.grad_ready = true;
  }
  return n.grad;
}

const Tensor& Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (!n.grad_ready) {
    const_cast<Tape*>(this)->zero_ = Tensor::zeros(n.value.shape());
    return zero_;
  }
  return n.grad;
}

void Tape::backward(Var output) {
  require(output.tape == this, "backward: output from a different tape");
  if (nodes_[output.id].value.numel() != 1) {
    throw std::invalid_argument("backward: output is not a scalar");
  }
  for (Node& n : nodes_) {
    n.grad_ready = false;
  }
  grad_slot(output.id)[0] = 1.0;
  // Reverse creation order is a reverse topological order of the DAG.
  for (int id = output.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.grad_ready || !n.pull) continue;
    n.pull(*this);
  }
}

// ---------------------------------------------------------------------------
// Primitives
// ---------------------------------------------------------------------------

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require(A.rank() == 2 && B.rank() == 2, "matmul: rank-2 operands required");
  require(A.cols() == B.rows(), "matmul: inner dimensions disagree");
  int m = A.rows(), k = A.cols(), n = B.cols();
  Tensor out = Tensor::zeros({m, n});
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      double av = A.at(i, p);
      for (int j = 0; j < n; ++j) out.at(i, j) += av * B.at(p, j);
    }
  }
  int aid = a.id, bid = b.id;
  return emit_op(a.tape, std::move(out), needs_grad(a, b),
                 [aid, bid, m, k, n](Tape& tp, int oid) {
                   const Tensor& g = tp.node(oid).grad;
                   const Tensor& A = tp.node(aid).value;
                   const Tensor& B = tp.node(bid).value;
                   if (tp.node(aid).requires_grad) {
                     Tensor& ga = tp.grad_slot(aid);  // g . B^T
                     for (int i = 0; i < m; ++i)
                       for (int j = 0; j < n; ++j) {
                         double gv = g.at(i, j);
                         for (int p = 0; p < k; ++p) ga.at(i, p) += gv * B.at(p, j);
                       }
                   }
                   if (tp.node(bid).requires_grad) {
                     Tensor& gb = tp.grad_slot(bid);  // A^T . g
                     for (int p = 0; p < k; ++p)
                       for (int i = 0; i < m; ++i) {
                         double av = A.at(i, p);
                         for (int j = 0; j < n; ++j) gb.at(p, j) += av * g.at(i, j);
                       }
                   }
                 });
}

Var transpose(Var a) {
  const Tensor& A = a.value();
  require(A.rank() == 2, "transpose: rank-2 operand required");
  int m = A.rows(), n = A.cols();
  Tensor out = Tensor::zeros({n, m});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.at(j, i) = A.at(i, j);
  int aid = a.id;
  return emit_op(a.tape, std::move(out), needs_grad(a), [aid, m, n](Tape& tp, int oid) {
    if (!tp.node(aid).requires_grad) return;
    const Tensor& g = tp.node(oid).grad;
    Tensor& ga = tp.grad_slot(aid);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) ga.at(i, j) += g.at(j, i);
  });
}

namespace {

Var binary_elementwise(Var a, Var b, const char* name,
                       double (*fwd)(double, double),
                       void (*pull)(Tape&, int, int, int)) {
  require_same_tape(a, b);
  require(a.value().same_shape(b.value()), name);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  Tensor out = Tensor::zeros(A.shape());
  for (std::size_t i = 0; i < A.numel(); ++i) out[i] = fwd(A[i], B[i]);
  int aid = a.id, bid = b.id;
  return emit_op(a.tape, std::move(out), needs_grad(a, b),
                 [aid, bid, pull](Tape& tp, int oid) { pull(tp, oid, aid, bid); });
}

}  // namespace

Var add(Var a, Var b) {
  return binary_elementwise(
      a, b, "add: shapes disagree", [](double x, double y) { return x + y; },
      [](Tape& tp, int oid, int aid, int bid) {
        const Tensor& g = tp.node(oid).grad;
        if (tp.node(aid).requires_grad) {
          Tensor& ga = tp.grad_slot(aid);
          for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
        }
        if (tp.node(bid).requires_grad) {
          Tensor& gb = tp.grad_slot(bid);
          for (std::size_t i = 0; i < g.numel(); ++i) gb[i] += g[i];
        }
      });
}

Var sub(Var a, Var b) {
  return binary_elementwise(
      a, b, "sub: shapes disagree", [](double x, double y) { return x - y; },
      [](Tape& tp, int oid, int aid, int bid) {
        const Tensor& g = tp.node(oid).grad;
        if (tp.node(aid).requires_grad) {
          Tensor& ga = tp.grad_slot(aid);
          for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
        }
        if (tp.node(bid).requires_grad) {
          Tensor& gb = tp.grad_slot(bid);
          for (std::size_t i = 0; i < g.numel(); ++i) gb[i] -= g[i];
        }
      });
}

Var mul(Var a, Var b) {
  return binary_elementwise(
      a, b, "mul: shapes disagree", [](double x, double y) { return x * y; },
      [](Tape& tp, int oid, int aid, int bid) {
        const Tensor& g = tp.node(oid).grad;
        const Tensor& A = tp.node(aid).value;
        const Tensor& B = tp.node(bid).value;
        if (tp.node(aid).requires_grad) {
          Tensor& ga = tp.grad_slot(aid);
          for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * B[i];
        }
        if (tp.node(bid).requires_grad) {
          Tensor& gb = tp.grad_slot(bid);
          for (std::size_t i = 0; i < g.numel(); ++i) gb[i] += g[i] * A[i];
        }
      });
}

namespace {

Var unary_elementwise(Var a, Tensor out, std::function<void(Tape&, int, int)> pull) {
  int aid = a.id;
  return emit_op(a.tape, std::move(out), needs_grad(a),
                 [aid, pull = std::move(pull)](Tape& tp, int oid) {
                   if (!tp.node(aid).requires_grad) return;
                   pull(tp, oid, aid);
                 });
}

}  // namespace

Var scale(Var a, double c) {
  const Tensor& A = a.value();
  Tensor out = Tensor::zeros(A.shape());
  for (std::size_t i = 0; i < A.numel(); ++i) out[i] = c * A[i];
  return unary_elementwise(a, std::move(out), [c](Tape& tp, int oid, int aid) {
    const Tensor& g = tp.node(oid).grad;
    Tensor& ga = tp.grad_slot(aid);
    for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += c * g[i];
  });
}

Var add_scalar(Var a, double c) {
  const Tensor& A = a.value();
  Tensor out = Tensor::zeros(A.shape());
  for (std::size_t i = 0; i < A.numel(); ++i) out[i] = A[i] + c;
  return unary_elementwise(a, std::move(out), [](Tape& tp, int oid, int aid) {
    const Tensor& g = tp.node(oid).grad;
    Tensor& ga = tp.grad_slot(aid);
    for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
  });
}

Var add_rowvec(Var a, Var rowvec) {
  require_same_tape(a, rowvec);
  const Tensor& A = a.value();
  const Tensor& R = rowvec.value();
  require(A.rank() == 2 && R.rank() == 2 && R.rows() == 1 && R.cols() == A.cols(),
          "add_rowvec: need (m x n) and (1 x n)");
  int m = A.rows(), n = A.cols();
  Tensor out = Tensor::zeros({m, n});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) = A.at(i, j) + R.at(0, j);
  int aid = a.id, rid = rowvec.id;
  return emit_op(a.tape, std::move(out), needs_grad(a, rowvec),
                 [aid, rid, m, n](Tape& tp, int oid) {
                   const Tensor& g = tp.node(oid).grad;
                   if (tp.node(aid).requires_grad) {
                     Tensor& ga = tp.grad_slot(aid);
                     for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
                   }
                   if (tp.node(rid).requires_grad) {
                     Tensor& gr = tp.grad_slot(rid);
                     for (int i = 0; i < m; ++i)
                       for (int j = 0; j < n; ++j) gr.at(0, j) += g.at(i, j);
                   }
                 });
}

Var mul_rowvec(Var a, Var rowvec) {
  require_same_tape(a, rowvec);
  const Tensor& A = a.value();
  const Tensor& R = rowvec.value();
  require(A.rank() == 2 && R.rank() == 2 && R.rows() == 1 && R.cols() == A.cols(),
          "mul_rowvec: need (m x n) and (1 x n)");
  int m = A.rows(), n = A.cols();
  Tensor out = Tensor::zeros({m, n});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) = A.at(i, j) * R.at(0, j);
  int aid = a.id, rid = rowvec.id;
  return emit_op(a.tape, std::move(out), needs_grad(a, rowvec),
                 [aid, rid, m, n](Tape& tp, int oid) {
                   const Tensor& g = tp.node(oid).grad;
                   const Tensor& A = tp.node(aid).value;
                   const Tensor& R = tp.node(rid).value;
                   if (tp.node(aid).requires_grad) {
                     Tensor& ga = tp.grad_slot(aid);
                     for (int i = 0; i < m; ++i)
                       for (int j = 0; j < n; ++j) ga.at(i, j) += g.at(i, j) * R.at(0, j);
                   }
                   if (tp.node(rid).requires_grad) {
                     Tensor& gr = tp.grad_slot(rid);
                     for (int i = 0; i < m; ++i)
                       for (int j = 0; j < n; ++j) gr.at(0, j) += g.at(i, j) * A.at(i, j);
                   }
                 });
}

Var concat_cols(Var a, Var b) {
  require_same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require(A.rank() == 2 && B.rank() == 2 && A.rows() == B.rows(),
          "concat_cols: row counts disagree");
  int m = A.rows(), na = A.cols(), nb = B.cols();
  Tensor out = Tensor::zeros({m, na + nb});
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < na; ++j) out.at(i, j) = A.at(i, j);
    for (int j = 0; j < nb; ++j) out.at(i, na + j) = B.at(i, j);
  }
  int aid = a.id, bid = b.id;
  return emit_op(a.tape, std::move(out), needs_grad(a, b),
                 [aid, bid, m, na, nb](Tape& tp, int oid) {
                   const Tensor& g = tp.node(oid).grad;
                   if (tp.node(aid).requires_grad) {
                     Tensor& ga = tp.grad_slot(aid);
                     for (int i = 0; i < m; ++i)
                       for (int j = 0; j < na; ++j) ga.at(i, j) += g.at(i, j);
                   }
                   if (tp.node(bid).requires_grad) {
                     Tensor& gb = tp.grad_slot(bid);
                     for (int i = 0; i < m; ++i)
                       for (int j = 0; j < nb; ++j) gb.at(i, j) += g.at(i, na + j);
                   }
                 });
}

Var concat_rows(Var a, Var b) {
  require_same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require(A.rank() == 2 && B.rank() == 2 && A.cols() == B.cols(),
          "concat_rows: column counts disagree");
  int ma = A.rows(), mb = B.rows(), n = A.cols();
  Tensor out = Tensor::zeros({ma + mb, n});
  for (int i = 0; i < ma; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) = A.at(i, j);
  for (int i = 0; i < mb; ++i)
    for (int j = 0; j < n; ++j) out.at(ma + i, j) = B.at(i, j);
  int aid = a.id, bid = b.id;
  return emit_op(a.tape, std::move(out), needs_grad(a, b),
                 [aid, bid, ma, mb, n](Tape& tp, int oid) {
                   const Tensor& g = tp.node(oid).grad;
                   if (tp.node(aid).requires_grad) {
                     Tensor& ga = tp.grad_slot(aid);
                     for (int i = 0; i < ma; ++i)
                       for (int j = 0; j < n; ++j) ga.at(i, j) += g.at(i, j);
                   }
                   if (tp.node(bid).requires_grad) {
                     Tensor& gb = tp.grad_slot(bid);
                     for (int i = 0; i < mb; ++i)
                       for (int j = 0; j < n; ++j) gb.at(i, j) += g.at(ma + i, j);
                   }
                 });
}

Var slice_cols(Var a, int start, int len) {
  const Tensor& A = a.value();
  require(A.rank() == 2, "slice_cols: rank-2 operand required");
  require(start >= 0 && len > 0 && start + len <= A.cols(), "slice_cols: range out of bounds");
  int m = A.rows();
  Tensor out = Tensor::zeros({m, len});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < len; ++j) out.at(i, j) = A.at(i, start + j);
  int aid = a.id;
  return emit_op(a.tape, std::move(out), needs_grad(a),
                 [aid, start, len, m](Tape& tp, int oid) {
                   if (!tp.node(aid).requires_grad) return;
                   const Tensor& g = tp.node(oid).grad;
                   Tensor& ga = tp.grad_slot(aid);
                   for (int i = 0; i < m; ++i)
                     for (int j = 0; j < len; ++j) ga.at(i, start + j) += g.at(i, j);
                 });
}

Var select_rows(Var a, std::vector<int> indices) {
  const Tensor& A = a.value();
  require(A.rank() == 2, "select_rows: rank-2 operand required");
  for (int idx : indices) {
    require(idx >= 0 && idx < A.rows(), "select_rows: index out of range");
  }
  int n = A.cols();
  int m = static_cast<int>(indices.size());
  Tensor out = Tensor::zeros({m, n});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) = A.at(indices[i], j);
  int aid = a.id;
  return emit_op(a.tape, std::move(out), needs_grad(a),
                 [aid, indices = std::move(indices), n](Tape& tp, int oid) {
                   if (!tp.node(aid).requires_grad) return;
                   const Tensor& g = tp.node(oid).grad;
                   Tensor& ga = tp.grad_slot(aid);
                   for (std::size_t i = 0; i < indices.size(); ++i)
                     for (int j = 0; j < n; ++j)
                       ga.at(indices[i], j) += g.at(static_cast<int>(i), j);
                 });
}

Var sum(Var a) {
  const Tensor& A = a.value();
  double s = 0.0;
  for (std::size_t i = 0; i < A.numel(); ++i) s += A[i];
  return unary_elementwise(a, Tensor::scalar(s), [](Tape& tp, int oid, int aid) {
    double g = tp.node(oid).grad[0];
    Tensor& ga = tp.grad_slot(aid);
    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += g;
  });
}

Var mean(Var a) {
  const Tensor& A = a.value();
  double s = 0.0;
  for (std::size_t i = 0; i < A.numel(); ++i) s += A[i];
  double inv = 1.0 / static_cast<double>(A.numel());
  return unary_elementwise(a, Tensor::scalar(s * inv), [inv](Tape& tp, int oid, int aid) {
    double g = tp.node(oid).grad[0] * inv;
    Tensor& ga = tp.grad_slot(aid);
    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += g;
  });
}

Var exp(Var a) {
  const Tensor& A = a.value();
  Tensor out = Tensor::zeros(A.shape());
  for (std::size_t i = 0; i < A.numel(); ++i) out[i] = std::exp(A[i]);
  return unary_elementwise(a, std::move(out), [](Tape& tp, int oid, int aid) {
    const Tensor& g = tp.node(oid).grad;
    const Tensor& y = tp.node(oid).value;
    Tensor& ga = tp.grad_slot(aid);
    for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * y[i];
  });
}

Var log(Var a) {
  const Tensor& A = a.value();
  Tensor out = Tensor::zeros(A.shape());
  for (std::size_t i = 0; i < A.numel(); ++i) {
    if (!(A[i] > 0.0)) throw std::domain_error("log: non-positive input");
    out[i] = std::log(A[i]);
  }
  return unary_elementwise(a, std::move(out), [](Tape& tp, int oid, int aid) {
    const Tensor& g = tp.node(oid).grad;
    const Tensor& x = tp.node(aid).value;
    Tensor& ga = tp.grad_slot(aid);
    for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] / x[i];
  });
}

Var abs(Var a) {
  const Tensor& A = a.value();
  Tensor out = Tensor::zeros(A.shape());
  for (std::size_t i = 0; i < A.numel(); ++i) out[i] = std::abs(A[i]);
  return unary_elementwise(a, std::move(out), [](Tape& tp, int oid, int aid) {
    const Tensor& g = tp.node(oid).grad;
    const Tensor& x = tp.node(aid).value;
    Tensor& ga = tp.grad_slot(aid);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      double s = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
      ga[i] += g[i] * s;
    }
  });
}

Var sigmoid(Var a) {
  const Tensor& A = a.value();
  Tensor out = Tensor::zeros(A.shape());
  for (std::size_t i = 0; i < A.numel(); ++i) {
    double x = A[i];
    // branch keeps exp() from overflowing for large |x|
    out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                      : std::exp(x) / (1.0 + std::exp(x));
  }
  return unary_elementwise(a, std::move(out), [](Tape& tp, int oid, int aid) {
    const Tensor& g = tp.node(oid).grad;
    const Tensor& y = tp.node(oid).value;
    Tensor& ga = tp.grad_slot(aid);
    for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var tanh(Var a) {
  const Tensor& A = a.value();
  Tensor out = Tensor::zeros(A.shape());
  for (std::size_t i = 0; i < A.numel(); ++i) out[i] = std::tanh(A[i]);
  return unary_elementwise(a, std::move(out), [](Tape& tp, int oid, int aid) {
    const Tensor& g = tp.node(oid).grad;
    const Tensor& y = tp.node(oid).value;
    Tensor& ga = tp.grad_slot(aid);
    for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var softplus(Var a) {
  const Tensor& A = a.value();
  Tensor out = Tensor::zeros(A.shape());
  for (std::size_t i = 0; i < A.numel(); ++i) {
    double x = A[i];
    out[i] = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  }
  return unary_elementwise(a, std::move(out), [](Tape& tp, int oid, int aid) {
    const Tensor& g = tp.node(oid).grad;
    const Tensor& x = tp.node(aid).value;
    Tensor& ga = tp.grad_slot(aid);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      double xi = x[i];
      double s = xi >= 0.0 ? 1.0 / (1.0 + std::exp(-xi))
                           : std::exp(xi) / (1.0 + std::exp(xi));
      ga[i] += g[i] * s;
    }
  });
}

Var softmax_rows(Var a) {
  const Tensor& A = a.value();
  require(A.rank() == 2, "softmax_rows: rank-2 operand required");
  int m = A.rows(), n = A.cols();
  Tensor out = Tensor::zeros({m, n});
  for (int i = 0; i < m; ++i) {
    double mx = A.at(i, 0);
    for (int j = 1; j < n; ++j) mx = std::max(mx, A.at(i, j));
    double z = 0.0;
    for (int j = 0; j < n; ++j) {
      double e = std::exp(A.at(i, j) - mx);
      out.at(i, j) = e;
      z += e;
    }
    for (int j = 0; j < n; ++j) out.at(i, j) /= z;
  }
  return unary_elementwise(a, std::move(out), [m, n](Tape& tp, int oid, int aid) {
    const Tensor& g = tp.node(oid).grad;
    const Tensor& y = tp.node(oid).value;
    Tensor& ga = tp.grad_slot(aid);
    for (int i = 0; i < m; ++i) {
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += g.at(i, j) * y.at(i, j);
      for (int j = 0; j < n; ++j) ga.at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
    }
  });
}

Var layer_norm_rows(Var a, double eps) {
  const Tensor& A = a.value();
  require(A.rank() == 2, "layer_norm_rows: rank-2 operand required");
  int m = A.rows(), n = A.cols();
  Tensor out = Tensor::zeros({m, n});
  std::vector<double> inv_sd(m);
  for (int i = 0; i < m; ++i) {
    double mu = 0.0;
    for (int j = 0; j < n; ++j) mu += A.at(i, j);
    mu /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) {
      double d = A.at(i, j) - mu;
      var += d * d;
    }
    var /= n;
    double is = 1.0 / std::sqrt(var + eps);
    inv_sd[i] = is;
    for (int j = 0; j < n; ++j) out.at(i, j) = (A.at(i, j) - mu) * is;
  }
  return unary_elementwise(
      a, std::move(out), [m, n, inv_sd = std::move(inv_sd)](Tape& tp, int oid, int aid) {
        const Tensor& g = tp.node(oid).grad;
        const Tensor& y = tp.node(oid).value;
        Tensor& ga = tp.grad_slot(aid);
        for (int i = 0; i < m; ++i) {
          double gm = 0.0, gym = 0.0;
          for (int j = 0; j < n; ++j) {
            gm += g.at(i, j);
            gym += g.at(i, j) * y.at(i, j);
          }
          gm /= n;
          gym /= n;
          for (int j = 0; j < n; ++j) {
            ga.at(i, j) += inv_sd[i] * (g.at(i, j) - gm - y.at(i, j) * gym);
          }
        }
      });
}

Var detach(Var a) { return a.tape->constant(a.value()); }

Var logsumexp(Var a) {
  const Tensor& A = a.value();
  double mx = A[0];
  for (std::size_t i = 1; i < A.numel(); ++i) mx = std::max(mx, A[i]);
  // shift by the detached max; the gradient of logsumexp is shift-invariant
  Var shifted = add_scalar(a, -mx);
  return add_scalar(log(sum(exp(shifted))), mx);
}

}  // namespace permurank
