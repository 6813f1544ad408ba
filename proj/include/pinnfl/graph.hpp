#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinnfl/jet.hpp"

namespace pinnfl {

enum class Opcode : std::uint8_t {
  kInput,
  kConst,
  kParam,
  kAdd,
  kSub,
  kMul,
  kMulAdd,
  kDiv,
  kNeg,
  kTanh,
  kSin,
  kCos,
  kExp,
  kLog,
  kPowConst,
  kPowVar,
  kLgamma,
  kDx,   // extract first seed-derivative as a new node
  kDxx,  // extract second seed-derivative
};

const char* opcode_name(Opcode op);

struct VarHandle {
  std::int32_t index = -1;
  bool valid() const { return index >= 0; }
};

// Raised on domain violations and non-finite intermediates. Evaluation
// never propagates NaN/Inf silently.
class EvalError : public std::runtime_error {
 public:
  EvalError(Opcode op, std::int32_t node, const std::string& what);
  Opcode op;
  std::int32_t node;
};

// Selects which component of an output jet backward() differentiates.
struct Selector {
  enum class Kind : std::uint8_t { kValue, kGrad, kHess } kind = Kind::kValue;
  std::int8_t i = 0;
  std::int8_t j = 0;
  static Selector value() { return {}; }
  static Selector grad(int i) { return {Kind::kGrad, static_cast<std::int8_t>(i), 0}; }
  static Selector hess(int i, int j);
};

// A scalar computational graph whose node values are degree-2 jets in
// `seed_dims` directions. Nodes are evaluated eagerly as they are built;
// backward() runs a reverse sweep with jet-valued adjoints and returns
// derivatives with respect to every parameter node.
//
// Graphs are cheap to clear() and rebuild; a single instance must not be
// shared across threads.
class Graph {
 public:
  explicit Graph(int seed_dims);

  int seed_dims() const { return d_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t param_count() const { return params_.size(); }
  void clear();
  void reserve(std::size_t nodes);

  VarHandle input(double value, int seed_index);
  VarHandle constant(double value);
  VarHandle param(double value);
  // Lifts a contiguous block of parameters; returns the first handle,
  // the rest follow consecutively.
  VarHandle params_bulk(std::span<const double> values);

  VarHandle add(VarHandle a, VarHandle b);
  VarHandle sub(VarHandle a, VarHandle b);
  VarHandle mul(VarHandle a, VarHandle b);
  VarHandle muladd(VarHandle a, VarHandle b, VarHandle c);  // a*b + c
  VarHandle div(VarHandle a, VarHandle b);
  VarHandle neg(VarHandle a);
  VarHandle tanh(VarHandle a);
  VarHandle sin(VarHandle a);
  VarHandle cos(VarHandle a);
  VarHandle exp(VarHandle a);
  VarHandle log(VarHandle a);
  VarHandle pow_const(VarHandle a, double c);
  VarHandle pow_var(VarHandle base, VarHandle expo);
  VarHandle lgamma(VarHandle a);
  VarHandle dx(VarHandle a, int i);
  VarHandle dxx(VarHandle a, int i, int j);

  // Generic dispatch over the primitive set; `aux` carries the exponent
  // for pow_const and the seed indices for dx/dxx.
  VarHandle apply(Opcode op, std::span<const VarHandle> args, double aux = 0.0);

  const Jet2& jet(VarHandle h) const;
  double value(VarHandle h) const { return jet(h).v; }
  std::span<const std::int32_t> param_nodes() const { return params_; }

  // Derivatives of the selected component of `output` with respect to all
  // parameter nodes, in lift order. `out` must have param_count() slots.
  void backward(VarHandle output, Selector sel, std::span<double> out) const;

  std::vector<double> backward(VarHandle output, Selector sel = Selector::value()) const;

 private:
  struct Node {
    Opcode op;
    std::int32_t a = -1;
    std::int32_t b = -1;
    std::int32_t c = -1;
    double aux = 0.0;
  };

  VarHandle push(Opcode op, std::int32_t a, std::int32_t b, std::int32_t c, double aux,
                 const Jet2& value);
  void check_handle(VarHandle h) const;

  int d_;
  std::vector<Node> nodes_;
  std::vector<Jet2> jets_;
  std::vector<std::int32_t> params_;
  mutable std::vector<Jet2> adj_;  // reverse-sweep scratch
};

struct GradcheckRow {
  int param = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
};

struct GradcheckReport {
  double max_rel_err = 0.0;
  std::vector<GradcheckRow> rows;
  bool pass(double tol) const { return max_rel_err < tol; }
};

// Builder receives a fresh graph plus parameter handles lifted at `point`
// and returns the scalar output node. Components smaller than `floor` in
// magnitude are skipped in the relative comparison.
GradcheckReport gradcheck(const std::function<VarHandle(Graph&, std::span<const VarHandle>)>& build,
                          int seed_dims, std::span<const double> point, double fd_step,
                          double floor = 1e-8);

}  // namespace pinnfl
