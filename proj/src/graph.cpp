#include "pinnfl/graph.hpp"

#include <cmath>
#include <cstring>

#include "pinnfl/special.hpp"

namespace pinnfl {
namespace {

// ---- degree-2 jet ring -------------------------------------------------
// The ring is R[e1..ed] truncated past degree 2; every primitive extends
// to it by Taylor composition. Storage keeps derivative values (not
// Taylor coefficients), so the product rule carries explicit factors.

Jet2 jconst(double v) {
  Jet2 r;
  r.v = v;
  return r;
}

Jet2 jadd(const Jet2& a, const Jet2& b, int d) {
  Jet2 r;
  r.v = a.v + b.v;
  for (int i = 0; i < d; ++i) r.g[i] = a.g[i] + b.g[i];
  const int hd = hess_count(d);
  for (int s = 0; s < hd; ++s) r.h[s] = a.h[s] + b.h[s];
  return r;
}

Jet2 jsub(const Jet2& a, const Jet2& b, int d) {
  Jet2 r;
  r.v = a.v - b.v;
  for (int i = 0; i < d; ++i) r.g[i] = a.g[i] - b.g[i];
  const int hd = hess_count(d);
  for (int s = 0; s < hd; ++s) r.h[s] = a.h[s] - b.h[s];
  return r;
}

Jet2 jneg(const Jet2& a, int d) {
  Jet2 r;
  r.v = -a.v;
  for (int i = 0; i < d; ++i) r.g[i] = -a.g[i];
  const int hd = hess_count(d);
  for (int s = 0; s < hd; ++s) r.h[s] = -a.h[s];
  return r;
}

Jet2 jmul(const Jet2& a, const Jet2& b, int d) {
  Jet2 r;
  r.v = a.v * b.v;
  for (int i = 0; i < d; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
  for (int j = 0; j < d; ++j)
    for (int i = 0; i <= j; ++i) {
      const int s = hess_slot(i, j);
      r.h[s] = a.h[s] * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] + a.v * b.h[s];
    }
  return r;
}

Jet2 jmuladd(const Jet2& a, const Jet2& b, const Jet2& c, int d) {
  Jet2 r;
  r.v = a.v * b.v + c.v;
  for (int i = 0; i < d; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i] + c.g[i];
  for (int j = 0; j < d; ++j)
    for (int i = 0; i <= j; ++i) {
      const int s = hess_slot(i, j);
      r.h[s] = a.h[s] * b.v + a.g[i] * b.g[j] + a.g[j] * b.g[i] + a.v * b.h[s] + c.h[s];
    }
  return r;
}

Jet2 jscale(const Jet2& a, double c, int d) {
  Jet2 r;
  r.v = a.v * c;
  for (int i = 0; i < d; ++i) r.g[i] = a.g[i] * c;
  const int hd = hess_count(d);
  for (int s = 0; s < hd; ++s) r.h[s] = a.h[s] * c;
  return r;
}

// Taylor composition of a scalar primitive: f, f', f'' at a.v.
Jet2 jcompose(const Jet2& a, double f, double df, double ddf, int d) {
  Jet2 r;
  r.v = f;
  for (int i = 0; i < d; ++i) r.g[i] = df * a.g[i];
  for (int j = 0; j < d; ++j)
    for (int i = 0; i <= j; ++i) {
      const int s = hess_slot(i, j);
      r.h[s] = df * a.h[s] + ddf * a.g[i] * a.g[j];
    }
  return r;
}

Jet2 jinv(const Jet2& a, int d) {
  const double iv = 1.0 / a.v;
  return jcompose(a, iv, -iv * iv, 2.0 * iv * iv * iv, d);
}

Jet2 jdiv(const Jet2& a, const Jet2& b, int d) { return jmul(a, jinv(b, d), d); }

Jet2 jtanh(const Jet2& a, int d) {
  const double t = std::tanh(a.v);
  const double sech2 = 1.0 - t * t;
  return jcompose(a, t, sech2, -2.0 * t * sech2, d);
}

Jet2 jsin(const Jet2& a, int d) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return jcompose(a, s, c, -s, d);
}

Jet2 jcos(const Jet2& a, int d) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return jcompose(a, c, -s, -c, d);
}

Jet2 jexp(const Jet2& a, int d) {
  const double e = std::exp(a.v);
  return jcompose(a, e, e, e, d);
}

Jet2 jlog(const Jet2& a, int d) {
  const double iv = 1.0 / a.v;
  return jcompose(a, std::log(a.v), iv, -iv * iv, d);
}

Jet2 jpow_const(const Jet2& a, double c, int d) {
  const double p = std::pow(a.v, c);
  const double c2 = c * (c - 1.0);
  const double dp = (c == 0.0) ? 0.0 : c * std::pow(a.v, c - 1.0);
  const double ddp = (c2 == 0.0) ? 0.0 : c2 * std::pow(a.v, c - 2.0);
  return jcompose(a, p, dp, ddp, d);
}

Jet2 jdigamma(const Jet2& a, int d) {
  return jcompose(a, digamma(a.v), trigamma(a.v), polygamma2(a.v), d);
}

Jet2 jlgamma(const Jet2& a, int d) {
  return jcompose(a, std::lgamma(a.v), digamma(a.v), trigamma(a.v), d);
}

// Transpose of the ring-multiplication operator: accumulates M_u^T * adj
// into `dst`. This is the adjoint propagation step; `u` is the local
// partial of the child with respect to the parent, `adj` the child's
// adjoint.
void adj_accumulate(Jet2& dst, const Jet2& u, const Jet2& adj, int d) {
  double v = u.v * adj.v;
  for (int i = 0; i < d; ++i) v += u.g[i] * adj.g[i];
  const int hd = hess_count(d);
  for (int s = 0; s < hd; ++s) v += u.h[s] * adj.h[s];
  dst.v += v;

  for (int k = 0; k < d; ++k) {
    double gk = u.v * adj.g[k];
    for (int i = 0; i < d; ++i) {
      const double w = (i == k) ? 2.0 : 1.0;
      gk += w * u.g[i] * adj.h[hess_slot_sym(i, k)];
    }
    dst.g[k] += gk;
  }
  for (int s = 0; s < hd; ++s) dst.h[s] += u.v * adj.h[s];
}

void adj_add(Jet2& dst, const Jet2& adj, int d) {
  dst.v += adj.v;
  for (int i = 0; i < d; ++i) dst.g[i] += adj.g[i];
  const int hd = hess_count(d);
  for (int s = 0; s < hd; ++s) dst.h[s] += adj.h[s];
}

void adj_sub(Jet2& dst, const Jet2& adj, int d) {
  dst.v -= adj.v;
  for (int i = 0; i < d; ++i) dst.g[i] -= adj.g[i];
  const int hd = hess_count(d);
  for (int s = 0; s < hd; ++s) dst.h[s] -= adj.h[s];
}

bool jet_zero(const Jet2& a, int d) {
  if (a.v != 0.0) return false;
  for (int i = 0; i < d; ++i)
    if (a.g[i] != 0.0) return false;
  const int hd = hess_count(d);
  for (int s = 0; s < hd; ++s)
    if (a.h[s] != 0.0) return false;
  return true;
}

}  // namespace

const char* opcode_name(Opcode op) {
  switch (op) {
    case Opcode::kInput: return "input";
    case Opcode::kConst: return "const";
    case Opcode::kParam: return "param";
    case Opcode::kAdd: return "add";
    case Opcode::kSub: return "sub";
    case Opcode::kMul: return "mul";
    case Opcode::kMulAdd: return "muladd";
    case Opcode::kDiv: return "div";
    case Opcode::kNeg: return "neg";
    case Opcode::kTanh: return "tanh";
    case Opcode::kSin: return "sin";
    case Opcode::kCos: return "cos";
    case Opcode::kExp: return "exp";
    case Opcode::kLog: return "ln";
    case Opcode::kPowConst: return "pow_const";
    case Opcode::kPowVar: return "pow_var";
    case Opcode::kLgamma: return "lgamma";
    case Opcode::kDx: return "dx";
    case Opcode::kDxx: return "dxx";
  }
  return "?";
}

EvalError::EvalError(Opcode op_, std::int32_t node_, const std::string& what)
    : std::runtime_error("eval error at node " + std::to_string(node_) + " (" +
                         opcode_name(op_) + "): " + what),
      op(op_),
      node(node_) {}

Selector Selector::hess(int i, int j) {
  Selector s;
  s.kind = Kind::kHess;
  s.i = static_cast<std::int8_t>(std::min(i, j));
  s.j = static_cast<std::int8_t>(std::max(i, j));
  return s;
}

Graph::Graph(int seed_dims) : d_(seed_dims) {
  if (seed_dims < 0 || seed_dims > kMaxSeeds)
    throw std::invalid_argument("Graph: seed_dims must be in [0, 3]");
}

void Graph::clear() {
  nodes_.clear();
  jets_.clear();
  params_.clear();
}

void Graph::reserve(std::size_t nodes) {
  nodes_.reserve(nodes);
  jets_.reserve(nodes);
}

VarHandle Graph::push(Opcode op, std::int32_t a, std::int32_t b, std::int32_t c, double aux,
                      const Jet2& value) {
  const auto idx = static_cast<std::int32_t>(nodes_.size());
  if (!jet_finite(value, d_)) throw EvalError(op, idx, "non-finite result");
  nodes_.push_back(Node{op, a, b, c, aux});
  jets_.push_back(value);
  return VarHandle{idx};
}

void Graph::check_handle(VarHandle h) const {
  if (!h.valid() || static_cast<std::size_t>(h.index) >= nodes_.size())
    throw std::out_of_range("VarHandle does not belong to this graph");
}

VarHandle Graph::input(double value, int seed_index) {
  if (seed_index < 0 || seed_index >= d_)
    throw std::out_of_range("input: seed_index out of range");
  Jet2 j = jconst(value);
  j.g[seed_index] = 1.0;
  return push(Opcode::kInput, -1, -1, -1, static_cast<double>(seed_index), j);
}

VarHandle Graph::constant(double value) {
  return push(Opcode::kConst, -1, -1, -1, 0.0, jconst(value));
}

VarHandle Graph::param(double value) {
  VarHandle h = push(Opcode::kParam, -1, -1, -1, 0.0, jconst(value));
  params_.push_back(h.index);
  return h;
}

VarHandle Graph::params_bulk(std::span<const double> values) {
  const auto first = static_cast<std::int32_t>(nodes_.size());
  for (double v : values)
    if (!std::isfinite(v)) throw EvalError(Opcode::kParam, first, "non-finite parameter");
  nodes_.resize(nodes_.size() + values.size(), Node{Opcode::kParam, -1, -1, -1, 0.0});
  jets_.resize(jets_.size() + values.size());
  params_.reserve(params_.size() + values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    jets_[first + k] = jconst(values[k]);
    params_.push_back(first + static_cast<std::int32_t>(k));
  }
  return VarHandle{first};
}

VarHandle Graph::add(VarHandle a, VarHandle b) {
  check_handle(a);
  check_handle(b);
  return push(Opcode::kAdd, a.index, b.index, -1, 0.0, jadd(jets_[a.index], jets_[b.index], d_));
}

VarHandle Graph::sub(VarHandle a, VarHandle b) {
  check_handle(a);
  check_handle(b);
  return push(Opcode::kSub, a.index, b.index, -1, 0.0, jsub(jets_[a.index], jets_[b.index], d_));
}

VarHandle Graph::mul(VarHandle a, VarHandle b) {
  check_handle(a);
  check_handle(b);
  return push(Opcode::kMul, a.index, b.index, -1, 0.0, jmul(jets_[a.index], jets_[b.index], d_));
}

VarHandle Graph::muladd(VarHandle a, VarHandle b, VarHandle c) {
  check_handle(a);
  check_handle(b);
  check_handle(c);
  return push(Opcode::kMulAdd, a.index, b.index, c.index, 0.0,
              jmuladd(jets_[a.index], jets_[b.index], jets_[c.index], d_));
}

VarHandle Graph::div(VarHandle a, VarHandle b) {
  check_handle(a);
  check_handle(b);
  if (jets_[b.index].v == 0.0)
    throw EvalError(Opcode::kDiv, static_cast<std::int32_t>(nodes_.size()), "division by zero");
  return push(Opcode::kDiv, a.index, b.index, -1, 0.0, jdiv(jets_[a.index], jets_[b.index], d_));
}

VarHandle Graph::neg(VarHandle a) {
  check_handle(a);
  return push(Opcode::kNeg, a.index, -1, -1, 0.0, jneg(jets_[a.index], d_));
}

VarHandle Graph::tanh(VarHandle a) {
  check_handle(a);
  return push(Opcode::kTanh, a.index, -1, -1, 0.0, jtanh(jets_[a.index], d_));
}

VarHandle Graph::sin(VarHandle a) {
  check_handle(a);
  return push(Opcode::kSin, a.index, -1, -1, 0.0, jsin(jets_[a.index], d_));
}

VarHandle Graph::cos(VarHandle a) {
  check_handle(a);
  return push(Opcode::kCos, a.index, -1, -1, 0.0, jcos(jets_[a.index], d_));
}

VarHandle Graph::exp(VarHandle a) {
  check_handle(a);
  return push(Opcode::kExp, a.index, -1, -1, 0.0, jexp(jets_[a.index], d_));
}

VarHandle Graph::log(VarHandle a) {
  check_handle(a);
  if (jets_[a.index].v <= 0.0)
    throw EvalError(Opcode::kLog, static_cast<std::int32_t>(nodes_.size()),
                    "ln of non-positive value");
  return push(Opcode::kLog, a.index, -1, -1, 0.0, jlog(jets_[a.index], d_));
}

VarHandle Graph::pow_const(VarHandle a, double c) {
  check_handle(a);
  const double base = jets_[a.index].v;
  const double ri = std::round(c);
  const bool integral = (ri == c);
  if (base < 0.0 && !integral)
    throw EvalError(Opcode::kPowConst, static_cast<std::int32_t>(nodes_.size()),
                    "negative base with non-integer exponent");
  if (base == 0.0 && c < 2.0)
    throw EvalError(Opcode::kPowConst, static_cast<std::int32_t>(nodes_.size()),
                    "zero base needs exponent >= 2");
  return push(Opcode::kPowConst, a.index, -1, -1, c, jpow_const(jets_[a.index], c, d_));
}

VarHandle Graph::pow_var(VarHandle base, VarHandle expo) {
  check_handle(base);
  check_handle(expo);
  if (jets_[base.index].v <= 0.0)
    throw EvalError(Opcode::kPowVar, static_cast<std::int32_t>(nodes_.size()),
                    "base must be positive");
  // x^w = exp(w ln x) in the ring
  const Jet2 lx = jlog(jets_[base.index], d_);
  return push(Opcode::kPowVar, base.index, expo.index, -1, 0.0, jexp(jmul(jets_[expo.index], lx, d_), d_));
}

VarHandle Graph::lgamma(VarHandle a) {
  check_handle(a);
  if (jets_[a.index].v <= 0.0)
    throw EvalError(Opcode::kLgamma, static_cast<std::int32_t>(nodes_.size()),
                    "lgamma argument must be positive");
  return push(Opcode::kLgamma, a.index, -1, -1, 0.0, jlgamma(jets_[a.index], d_));
}

VarHandle Graph::dx(VarHandle a, int i) {
  check_handle(a);
  if (i < 0 || i >= d_) throw std::out_of_range("dx: seed index out of range");
  const Jet2& p = jets_[a.index];
  Jet2 j;
  j.v = p.g[i];
  for (int k = 0; k < d_; ++k) j.g[k] = p.h[hess_slot_sym(i, k)];
  // second derivatives of an extracted component would be third
  // derivatives of the parent; the jet degree drops and they are zero.
  return push(Opcode::kDx, a.index, -1, -1, static_cast<double>(i), j);
}

VarHandle Graph::dxx(VarHandle a, int i, int j) {
  check_handle(a);
  if (i < 0 || i >= d_ || j < 0 || j >= d_)
    throw std::out_of_range("dxx: seed index out of range");
  Jet2 r;
  r.v = jets_[a.index].h[hess_slot_sym(i, j)];
  return push(Opcode::kDxx, a.index, -1, -1, static_cast<double>(hess_slot_sym(i, j)), r);
}

VarHandle Graph::apply(Opcode op, std::span<const VarHandle> args, double aux) {
  switch (op) {
    case Opcode::kAdd: return add(args[0], args[1]);
    case Opcode::kSub: return sub(args[0], args[1]);
    case Opcode::kMul: return mul(args[0], args[1]);
    case Opcode::kMulAdd: return muladd(args[0], args[1], args[2]);
    case Opcode::kDiv: return div(args[0], args[1]);
    case Opcode::kNeg: return neg(args[0]);
    case Opcode::kTanh: return tanh(args[0]);
    case Opcode::kSin: return sin(args[0]);
    case Opcode::kCos: return cos(args[0]);
    case Opcode::kExp: return exp(args[0]);
    case Opcode::kLog: return log(args[0]);
    case Opcode::kPowConst: return pow_const(args[0], aux);
    case Opcode::kPowVar: return pow_var(args[0], args[1]);
    case Opcode::kLgamma: return lgamma(args[0]);
    case Opcode::kDx: return dx(args[0], static_cast<int>(aux));
    case Opcode::kDxx: {
      const int s = static_cast<int>(aux);
      // decode (i, j) from a packed pair i*4+j for the generic entry point
      return dxx(args[0], s / 4, s % 4);
    }
    default:
      throw std::invalid_argument("apply: not a primitive opcode");
  }
}

const Jet2& Graph::jet(VarHandle h) const {
  check_handle(h);
  return jets_[h.index];
}

void Graph::backward(VarHandle output, Selector sel, std::span<double> out) const {
  check_handle(output);
  if (out.size() != params_.size())
    throw std::invalid_argument("backward: output span size mismatch");
  const int d = d_;
  const std::int32_t top = output.index;
  if (adj_.size() < static_cast<std::size_t>(top) + 1) adj_.resize(top + 1);
  std::fill_n(adj_.data(), top + 1, Jet2{});

  Jet2 seed;
  switch (sel.kind) {
    case Selector::Kind::kValue: seed.v = 1.0; break;
    case Selector::Kind::kGrad:
      if (sel.i >= d) throw std::out_of_range("backward: grad selector out of range");
      seed.g[sel.i] = 1.0;
      break;
    case Selector::Kind::kHess:
      if (sel.j >= d) throw std::out_of_range("backward: hess selector out of range");
      seed.h[hess_slot(sel.i, sel.j)] = 1.0;
      break;
  }
  adj_[top] = seed;

  for (std::int32_t idx = top; idx >= 0; --idx) {
    const Jet2& a = adj_[idx];
    if (jet_zero(a, d)) continue;
    const Node& n = nodes_[idx];
    switch (n.op) {
      case Opcode::kInput:
      case Opcode::kConst:
      case Opcode::kParam:
        break;
      case Opcode::kAdd:
        adj_add(adj_[n.a], a, d);
        adj_add(adj_[n.b], a, d);
        break;
      case Opcode::kSub:
        adj_add(adj_[n.a], a, d);
        adj_sub(adj_[n.b], a, d);
        break;
      case Opcode::kNeg:
        adj_sub(adj_[n.a], a, d);
        break;
      case Opcode::kMul:
        adj_accumulate(adj_[n.a], jets_[n.b], a, d);
        adj_accumulate(adj_[n.b], jets_[n.a], a, d);
        break;
      case Opcode::kMulAdd:
        adj_accumulate(adj_[n.a], jets_[n.b], a, d);
        adj_accumulate(adj_[n.b], jets_[n.a], a, d);
        adj_add(adj_[n.c], a, d);
        break;
      case Opcode::kDiv: {
        const Jet2 invb = jinv(jets_[n.b], d);
        adj_accumulate(adj_[n.a], invb, a, d);
        adj_accumulate(adj_[n.b], jneg(jmul(jets_[idx], invb, d), d), a, d);
        break;
      }
      case Opcode::kTanh: {
        const Jet2& y = jets_[idx];
        Jet2 u = jneg(jmul(y, y, d), d);
        u.v += 1.0;
        adj_accumulate(adj_[n.a], u, a, d);
        break;
      }
      case Opcode::kSin:
        adj_accumulate(adj_[n.a], jcos(jets_[n.a], d), a, d);
        break;
      case Opcode::kCos:
        adj_accumulate(adj_[n.a], jneg(jsin(jets_[n.a], d), d), a, d);
        break;
      case Opcode::kExp:
        adj_accumulate(adj_[n.a], jets_[idx], a, d);
        break;
      case Opcode::kLog:
        adj_accumulate(adj_[n.a], jinv(jets_[n.a], d), a, d);
        break;
      case Opcode::kPowConst:
        adj_accumulate(adj_[n.a], jscale(jpow_const(jets_[n.a], n.aux - 1.0, d), n.aux, d), a, d);
        break;
      case Opcode::kPowVar: {
        // y = x^w: dy/dx = w y / x, dy/dw = y ln x
        const Jet2& y = jets_[idx];
        const Jet2& x = jets_[n.a];
        const Jet2& w = jets_[n.b];
        adj_accumulate(adj_[n.a], jdiv(jmul(w, y, d), x, d), a, d);
        adj_accumulate(adj_[n.b], jmul(y, jlog(x, d), d), a, d);
        break;
      }
      case Opcode::kLgamma:
        adj_accumulate(adj_[n.a], jdigamma(jets_[n.a], d), a, d);
        break;
      case Opcode::kDx: {
        const int i = static_cast<int>(n.aux);
        Jet2& pa = adj_[n.a];
        pa.g[i] += a.v;
        for (int k = 0; k < d; ++k) pa.h[hess_slot_sym(i, k)] += a.g[k];
        break;
      }
      case Opcode::kDxx: {
        adj_[n.a].h[static_cast<int>(n.aux)] += a.v;
        break;
      }
    }
  }

  for (std::size_t k = 0; k < params_.size(); ++k) out[k] = adj_[params_[k]].v;
}

std::vector<double> Graph::backward(VarHandle output, Selector sel) const {
  std::vector<double> out(params_.size());
  backward(output, sel, out);
  return out;
}

GradcheckReport gradcheck(const std::function<VarHandle(Graph&, std::span<const VarHandle>)>& build,
                          int seed_dims, std::span<const double> point, double fd_step,
                          double floor) {
  const std::size_t n = point.size();
  std::vector<double> shifted(point.begin(), point.end());

  auto eval = [&](std::span<const double> at, std::vector<double>* grad) {
    Graph g(seed_dims);
    std::vector<VarHandle> ps(at.size());
    for (std::size_t i = 0; i < at.size(); ++i) ps[i] = g.param(at[i]);
    VarHandle out = build(g, ps);
    if (grad) *grad = g.backward(out);
    return g.value(out);
  };

  std::vector<double> analytic;
  eval(point, &analytic);

  GradcheckReport rep;
  rep.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double save = shifted[i];
    shifted[i] = save + fd_step;
    const double fp = eval(shifted, nullptr);
    shifted[i] = save - fd_step;
    const double fm = eval(shifted, nullptr);
    shifted[i] = save;
    const double numeric = (fp - fm) / (2.0 * fd_step);
    GradcheckRow row;
    row.param = static_cast<int>(i);
    row.analytic = analytic[i];
    row.numeric = numeric;
    const double scale = std::max(std::abs(analytic[i]), std::abs(numeric));
    row.rel_err = (scale > floor) ? std::abs(analytic[i] - numeric) / scale : 0.0;
    rep.max_rel_err = std::max(rep.max_rel_err, row.rel_err);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace pinnfl
