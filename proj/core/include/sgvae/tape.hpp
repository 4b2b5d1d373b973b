#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "sgvae/tensor.hpp"

namespace sgvae::ad {

class Tape;

// Handle to a tape node. Cheap to copy; invalid when default-constructed.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
};

using GradMap = std::map<std::string, Tensor>;

// Reverse-mode tape over Tensor values.
//
// Nodes are appended in evaluation order, which is by construction a
// topological order; the backward pass walks them in exact reverse. Backward
// rules are plain function pointers reading values (and writing gradients)
// through the tape, so recording a node costs no type-erased allocation.
// Gradients of a parameter used several times accumulate additively.
class Tape {
 public:
  using BackwardFn = void (*)(Tape&, int id);

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf holding a value that never receives gradient.
  Var constant(Tensor t);
  Var constant_scalar(double v) { return constant(Tensor::scalar(v)); }

  // Named leaf. Gradient is reported under `name` when the tensor requires
  // grad. Binding the same name twice returns the original node.
  Var param(const std::string& name, const Tensor& t);

  const Tensor& value(Var v) const { return nodes_[check(v)].value; }
  const Tensor& value(int id) const { return nodes_[id].value; }
  double scalar_value(Var v) const { return value(v).value(); }
  bool requires_grad(Var v) const { return nodes_[check(v)].requires_grad; }

  // Runs the reverse pass from a scalar root and returns gradients for every
  // named parameter bound on this tape. Parameters the root does not reach
  // get zero tensors. One backward per tape.
  GradMap backward(Var root);

  std::size_t size() const { return nodes_.size(); }

  // --- plumbing used by the op library ---
  Var emit(Tensor value, std::span<const Var> inputs, BackwardFn back,
           int iaux = 0, double daux = 0.0);
  Tensor& grad(int id);             // lazily allocated, zero-initialized
  const std::vector<int>& inputs(int id) const { return nodes_[id].in; }
  int iaux(int id) const { return nodes_[id].iaux; }
  double daux(int id) const { return nodes_[id].daux; }

 private:
  struct Node {
    Tensor value;
    Tensor grad_buf;
    bool grad_live = false;
    bool requires_grad = false;
    std::vector<int> in;
    BackwardFn back = nullptr;
    int iaux = 0;
    double daux = 0.0;
    int param_index = -1;  // into param_names_
  };

  int check(Var v) const;

  std::vector<Node> nodes_;
  std::vector<std::string> param_names_;
  std::map<std::string, int> param_lookup_;  // name -> node id
  bool backward_done_ = false;
};

// ---- operation library ----
//
// Every op validates shapes, computes the forward value, and records a
// backward rule when any input requires grad.

// W[m x n] * x[n] + b[m]; pass an invalid Var for b to skip the bias.
Var affine(Var W, Var x, Var b);
Var matvec(Var W, Var x);

Var add(Var a, Var b);        // elementwise, same shape
Var mul(Var a, Var b);        // elementwise (Hadamard)
Var smul(Var s, Var x);       // scalar s times every element of x
Var scale(Var a, double c);
Var concat(std::span<const Var> parts);
Var stack_scalars(std::span<const Var> scalars);
Var pick(Var x, int index);   // scalar x[index]
Var sum(Var x);               // scalar sum of elements

Var sigmoid(Var x);
Var tanh(Var x);
Var log_softmax(Var x);       // max-subtracted, numerically stable
Var log_sigmoid(Var x);       // log(sigma(x)), stable for large |x|

// log N(z; 0, I) = -(d/2) ln(2*pi) - ||z||^2 / 2
Var gaussian_logpdf(Var z);

// (1 - u) . h + u . c, the GRU state blend, fused so the value matches the
// written form exactly.
Var gate_blend(Var h, Var u, Var c);

struct GruWeights {
  Var w_r, u_r, b_r;
  Var w_u, u_u, b_u;
  Var w_c, u_c, b_c;
};

// Standard GRU update:
//   r  = sigma(W_r a + U_r h + b_r)
//   u  = sigma(W_u a + U_u h + b_u)
//   c  = tanh(W_c a + U_c (r . h) + b_c)
//   h' = (1 - u) . h + u . c
Var gru_cell(Var h, Var a, const GruWeights& w);

}  // namespace sgvae::ad
