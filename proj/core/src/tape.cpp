#include "sgvae/tape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sgvae::ad {

namespace {

[[noreturn]] void contract_violation(const std::string& what) {
  throw std::invalid_argument("contract violation: " + what);
}

void check_same_tape(Var a, Var b) {
  if (a.tape != b.tape) contract_violation("operands from different tapes");
}

bool any_requires_grad(Tape& t, std::span<const Var> vs) {
  for (Var v : vs)
    if (v.valid() && t.requires_grad(v)) return true;
  return false;
}

}  // namespace

int Tape::check(Var v) const {
  if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
    contract_violation("Var does not belong to this tape");
  return v.id;
}

Var Tape::constant(Tensor t) {
  Node n;
  n.value = std::move(t);
  n.requires_grad = false;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::param(const std::string& name, const Tensor& t) {
  if (auto it = param_lookup_.find(name); it != param_lookup_.end())
    return Var{this, it->second};
  Node n;
  n.value = t;
  n.requires_grad = t.requires_grad;
  n.param_index = static_cast<int>(param_names_.size());
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_names_.push_back(name);
  param_lookup_.emplace(name, id);
  return Var{this, id};
}

Var Tape::emit(Tensor value, std::span<const Var> inputs, BackwardFn back,
               int iaux, double daux) {
  Node n;
  n.value = std::move(value);
  n.in.reserve(inputs.size());
  for (Var v : inputs) n.in.push_back(v.valid() ? check(v) : -1);
  n.requires_grad = any_requires_grad(*this, inputs);
  if (n.requires_grad) {
    n.back = back;
    n.iaux = iaux;
    n.daux = daux;
  }
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Tensor& Tape::grad(int id) {
  Node& n = nodes_[id];
  if (!n.grad_live) {
    n.grad_buf = Tensor::zeros(n.value.shape);
    n.grad_live = true;
  }
  return n.grad_buf;
}

GradMap Tape::backward(Var root) {
  const int root_id = check(root);
  if (!nodes_[root_id].value.is_scalar())
    contract_violation("backward root must be scalar");
  if (backward_done_)
    throw std::logic_error("Tape::backward called twice");
  backward_done_ = true;

  grad(root_id)[0] = 1.0;
  for (int id = root_id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.grad_live || n.back == nullptr) continue;
    n.back(*this, id);
  }

  GradMap out;
  for (const auto& [name, id] : param_lookup_) {
    const Node& n = nodes_[id];
    if (!n.requires_grad) continue;
    out[name] = n.grad_live ? n.grad_buf : Tensor::zeros(n.value.shape);
  }
  return out;
}

// ---- backward rules ----

namespace {

void back_affine(Tape& t, int id) {
  const auto& in = t.inputs(id);
  const Tensor& gy = t.grad(id);
  const Tensor& W = t.value(in[0]);
  const Tensor& x = t.value(in[1]);
  const int m = W.shape.d0;
  const int n = W.shape.d1;
  Tensor& gW = t.grad(in[0]);
  Tensor& gx = t.grad(in[1]);
  for (int i = 0; i < m; ++i) {
    const double g = gy[i];
    for (int j = 0; j < n; ++j) {
      gW[static_cast<std::size_t>(i) * n + j] += g * x[j];
      gx[j] += g * W[static_cast<std::size_t>(i) * n + j];
    }
  }
  if (in.size() > 2 && in[2] >= 0) {
    Tensor& gb = t.grad(in[2]);
    for (int i = 0; i < m; ++i) gb[i] += gy[i];
  }
}

void back_add(Tape& t, int id) {
  const auto& in = t.inputs(id);
  const Tensor& gy = t.grad(id);
  Tensor& ga = t.grad(in[0]);
  Tensor& gb = t.grad(in[1]);
  for (std::size_t i = 0; i < gy.numel(); ++i) {
    ga[i] += gy[i];
    gb[i] += gy[i];
  }
}

void back_mul(Tape& t, int id) {
  const auto& in = t.inputs(id);
  const Tensor& gy = t.grad(id);
  const Tensor& a = t.value(in[0]);
  const Tensor& b = t.value(in[1]);
  Tensor& ga = t.grad(in[0]);
  Tensor& gb = t.grad(in[1]);
  for (std::size_t i = 0; i < gy.numel(); ++i) {
    ga[i] += gy[i] * b[i];
    gb[i] += gy[i] * a[i];
  }
}

void back_smul(Tape& t, int id) {
  const auto& in = t.inputs(id);
  const Tensor& gy = t.grad(id);
  const double s = t.value(in[0]).value();
  const Tensor& x = t.value(in[1]);
  Tensor& gs = t.grad(in[0]);
  Tensor& gx = t.grad(in[1]);
  for (std::size_t i = 0; i < gy.numel(); ++i) {
    gs[0] += gy[i] * x[i];
    gx[i] += s * gy[i];
  }
}

void back_scale(Tape& t, int id) {
  const auto& in = t.inputs(id);
  const Tensor& gy = t.grad(id);
  const double c = t.daux(id);
  Tensor& ga = t.grad(in[0]);
  for (std::size_t i = 0; i < gy.numel(); ++i) ga[i] += c * gy[i];
}

void back_concat(Tape& t, int id) {
  const auto& in = t.inputs(id);
  const Tensor& gy = t.grad(id);
  std::size_t off = 0;
  for (int src : in) {
    Tensor& g = t.grad(src);
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += gy[off + i];
    off += g.numel();
  }
}

void back_stack(Tape& t, int id) {
  const auto& in = t.inputs(id);
  const Tensor& gy = t.grad(id);
  for (std::size_t i = 0; i < in.size(); ++i) t.grad(in[i])[0] += gy[i];
}

void back_pick(Tape& t, int id) {
  const auto& in = t.inputs(id);
  t.grad(in[0])[t.iaux(id)] += t.grad(id)[0];
}

void back_sum(Tape& t, int id) {
  const auto& in = t.inputs(id);
  const double g = t.grad(id)[0];
  Tensor& gx = t.grad(in[0]);
  for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += g;
}

void back_sigmoid(Tape& t, int id) {
  const auto& in = t.inputs(id);
  const Tensor& y = t.value(id);
  const Tensor& gy = t.grad(id);
  Tensor& gx = t.grad(in[0]);
  for (std::size_t i = 0; i < y.numel(); ++i)
    gx[i] += gy[i] * y[i] * (1.0 - y[i]);
}

void back_tanh(Tape& t, int id) {
  const auto& in = t.inputs(id);
  const Tensor& y = t.value(id);
  const Tensor& gy = t.grad(id);
  Tensor& gx = t.grad(in[0]);
  for (std::size_t i = 0; i < y.numel(); ++i)
    gx[i] += gy[i] * (1.0 - y[i] * y[i]);
}

void back_log_softmax(Tape& t, int id) {
  const auto& in = t.inputs(id);
  const Tensor& y = t.value(id);
  const Tensor& gy = t.grad(id);
  Tensor& gx = t.grad(in[0]);
  double gsum = 0.0;
  for (std::size_t i = 0; i < y.numel(); ++i) gsum += gy[i];
  for (std::size_t i = 0; i < y.numel(); ++i)
    gx[i] += gy[i] - std::exp(y[i]) * gsum;
}

void back_log_sigmoid(Tape& t, int id) {
  const auto& in = t.inputs(id);
  const Tensor& y = t.value(id);  // y = log sigma(x), so sigma(-x) = 1 - e^y
  const Tensor& gy = t.grad(id);
  Tensor& gx = t.grad(in[0]);
  for (std::size_t i = 0; i < y.numel(); ++i)
    gx[i] += gy[i] * (1.0 - std::exp(y[i]));
}

void back_gaussian_logpdf(Tape& t, int id) {
  const auto& in = t.inputs(id);
  const double g = t.grad(id)[0];
  const Tensor& z = t.value(in[0]);
  Tensor& gz = t.grad(in[0]);
  for (std::size_t i = 0; i < z.numel(); ++i) gz[i] -= g * z[i];
}

void back_gate_blend(Tape& t, int id) {
  const auto& in = t.inputs(id);
  const Tensor& gy = t.grad(id);
  const Tensor& h = t.value(in[0]);
  const Tensor& u = t.value(in[1]);
  const Tensor& c = t.value(in[2]);
  Tensor& gh = t.grad(in[0]);
  Tensor& gu = t.grad(in[1]);
  Tensor& gc = t.grad(in[2]);
  for (std::size_t i = 0; i < gy.numel(); ++i) {
    gh[i] += gy[i] * (1.0 - u[i]);
    gu[i] += gy[i] * (c[i] - h[i]);
    gc[i] += gy[i] * u[i];
  }
}

Tape& tape_of(Var v) {
  if (!v.valid()) contract_violation("invalid Var");
  return *v.tape;
}

}  // namespace

// ---- ops ----

Var affine(Var W, Var x, Var b) {
  Tape& t = tape_of(W);
  check_same_tape(W, x);
  const Tensor& tw = t.value(W);
  const Tensor& tx = t.value(x);
  if (tw.shape.rank != 2 || tx.shape.rank != 1 || tw.shape.d1 != tx.shape.d0)
    contract_violation("affine: shape mismatch");
  const int m = tw.shape.d0;
  const int n = tw.shape.d1;
  Tensor y(Shape{m});
  if (b.valid()) {
    check_same_tape(W, b);
    const Tensor& tb = t.value(b);
    if (tb.shape.rank != 1 || tb.shape.d0 != m)
      contract_violation("affine: bias shape mismatch");
    for (int i = 0; i < m; ++i) y[i] = tb[i];
  }
  for (int i = 0; i < m; ++i) {
    double acc = y[i];
    for (int j = 0; j < n; ++j)
      acc += tw[static_cast<std::size_t>(i) * n + j] * tx[j];
    y[i] = acc;
  }
  const Var in[3] = {W, x, b};
  return t.emit(std::move(y), std::span<const Var>(in, b.valid() ? 3 : 2),
                back_affine);
}

Var matvec(Var W, Var x) { return affine(W, x, Var{}); }

Var add(Var a, Var b) {
  Tape& t = tape_of(a);
  check_same_tape(a, b);
  const Tensor& ta = t.value(a);
  const Tensor& tb = t.value(b);
  if (!(ta.shape == tb.shape)) contract_violation("add: shape mismatch");
  Tensor y(ta.shape);
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = ta[i] + tb[i];
  const Var in[2] = {a, b};
  return t.emit(std::move(y), in, back_add);
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a);
  check_same_tape(a, b);
  const Tensor& ta = t.value(a);
  const Tensor& tb = t.value(b);
  if (!(ta.shape == tb.shape)) contract_violation("mul: shape mismatch");
  Tensor y(ta.shape);
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = ta[i] * tb[i];
  const Var in[2] = {a, b};
  return t.emit(std::move(y), in, back_mul);
}

Var smul(Var s, Var x) {
  Tape& t = tape_of(s);
  check_same_tape(s, x);
  const Tensor& ts = t.value(s);
  if (!ts.is_scalar()) contract_violation("smul: s not scalar");
  const Tensor& tx = t.value(x);
  Tensor y(tx.shape);
  const double sv = ts.value();
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = sv * tx[i];
  const Var in[2] = {s, x};
  return t.emit(std::move(y), in, back_smul);
}

Var scale(Var a, double c) {
  Tape& t = tape_of(a);
  const Tensor& ta = t.value(a);
  Tensor y(ta.shape);
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = c * ta[i];
  const Var in[1] = {a};
  return t.emit(std::move(y), in, back_scale, 0, c);
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) contract_violation("concat: empty input");
  Tape& t = tape_of(parts[0]);
  int total = 0;
  for (Var p : parts) {
    check_same_tape(parts[0], p);
    const Tensor& tp = t.value(p);
    if (tp.shape.rank != 1) contract_violation("concat: rank != 1");
    total += tp.shape.d0;
  }
  Tensor y(Shape{total});
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& tp = t.value(p);
    std::copy(tp.data.begin(), tp.data.end(), y.data.begin() + off);
    off += tp.numel();
  }
  return t.emit(std::move(y), parts, back_concat);
}

Var stack_scalars(std::span<const Var> scalars) {
  if (scalars.empty()) contract_violation("stack_scalars: empty input");
  Tape& t = tape_of(scalars[0]);
  Tensor y(Shape{static_cast<int>(scalars.size())});
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    check_same_tape(scalars[0], scalars[i]);
    y[i] = t.value(scalars[i]).value();
  }
  return t.emit(std::move(y), scalars, back_stack);
}

Var pick(Var x, int index) {
  Tape& t = tape_of(x);
  const Tensor& tx = t.value(x);
  if (index < 0 || static_cast<std::size_t>(index) >= tx.numel())
    contract_violation("pick: index out of range");
  const Var in[1] = {x};
  return t.emit(Tensor::scalar(tx[index]), in, back_pick, index);
}

Var sum(Var x) {
  Tape& t = tape_of(x);
  const Tensor& tx = t.value(x);
  double acc = 0.0;
  for (std::size_t i = 0; i < tx.numel(); ++i) acc += tx[i];
  const Var in[1] = {x};
  return t.emit(Tensor::scalar(acc), in, back_sum);
}

Var sigmoid(Var x) {
  Tape& t = tape_of(x);
  const Tensor& tx = t.value(x);
  Tensor y(tx.shape);
  for (std::size_t i = 0; i < y.numel(); ++i) {
    const double v = tx[i];
    y[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                    : std::exp(v) / (1.0 + std::exp(v));
  }
  const Var in[1] = {x};
  return t.emit(std::move(y), in, back_sigmoid);
}

Var tanh(Var x) {
  Tape& t = tape_of(x);
  const Tensor& tx = t.value(x);
  Tensor y(tx.shape);
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = std::tanh(tx[i]);
  const Var in[1] = {x};
  return t.emit(std::move(y), in, back_tanh);
}

Var log_softmax(Var x) {
  Tape& t = tape_of(x);
  const Tensor& tx = t.value(x);
  if (tx.numel() == 0) contract_violation("log_softmax: empty input");
  double mx = tx[0];
  for (std::size_t i = 1; i < tx.numel(); ++i) mx = std::max(mx, tx[i]);
  double sum_exp = 0.0;
  for (std::size_t i = 0; i < tx.numel(); ++i) sum_exp += std::exp(tx[i] - mx);
  const double lse = std::log(sum_exp);
  Tensor y(tx.shape);
  for (std::size_t i = 0; i < tx.numel(); ++i) y[i] = tx[i] - mx - lse;
  const Var in[1] = {x};
  return t.emit(std::move(y), in, back_log_softmax);
}

Var log_sigmoid(Var x) {
  Tape& t = tape_of(x);
  const Tensor& tx = t.value(x);
  Tensor y(tx.shape);
  for (std::size_t i = 0; i < y.numel(); ++i) {
    const double v = tx[i];
    // -softplus(-v), split by sign for stability
    y[i] = v >= 0.0 ? -std::log1p(std::exp(-v)) : v - std::log1p(std::exp(v));
  }
  const Var in[1] = {x};
  return t.emit(std::move(y), in, back_log_sigmoid);
}

Var gaussian_logpdf(Var z) {
  Tape& t = tape_of(z);
  const Tensor& tz = t.value(z);
  const double d = static_cast<double>(tz.numel());
  double sq = 0.0;
  for (std::size_t i = 0; i < tz.numel(); ++i) sq += tz[i] * tz[i];
  const double val =
      -0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * sq;
  const Var in[1] = {z};
  return t.emit(Tensor::scalar(val), in, back_gaussian_logpdf);
}

Var gate_blend(Var h, Var u, Var c) {
  Tape& t = tape_of(h);
  check_same_tape(h, u);
  check_same_tape(h, c);
  const Tensor& th = t.value(h);
  const Tensor& tu = t.value(u);
  const Tensor& tc = t.value(c);
  if (!(th.shape == tu.shape) || !(th.shape == tc.shape))
    contract_violation("gate_blend: shape mismatch");
  Tensor y(th.shape);
  for (std::size_t i = 0; i < y.numel(); ++i)
    y[i] = (1.0 - tu[i]) * th[i] + tu[i] * tc[i];
  const Var in[3] = {h, u, c};
  return t.emit(std::move(y), in, back_gate_blend);
}

Var gru_cell(Var h, Var a, const GruWeights& w) {
  Tape& t = tape_of(h);
  if (!(t.value(h).shape == t.value(a).shape))
    contract_violation("gru_cell: h and a dimensions differ");
  const Var r = sigmoid(add(affine(w.w_r, a, w.b_r), matvec(w.u_r, h)));
  const Var u = sigmoid(add(affine(w.w_u, a, w.b_u), matvec(w.u_u, h)));
  const Var c = tanh(add(affine(w.w_c, a, w.b_c), matvec(w.u_c, mul(r, h))));
  return gate_blend(h, u, c);
}

}  // namespace sgvae::ad
