#include "pinnfl/mlp.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace pinnfl {
namespace {

void validate(const MlpConfig& c) {
  if (c.in_dim < 1 || c.in_dim > 3) throw std::invalid_argument("MlpConfig: in_dim must be 1..3");
  if (c.out_dim < 1 || c.out_dim > 3)
    throw std::invalid_argument("MlpConfig: out_dim must be 1..3");
  if (c.hidden_layers < 1) throw std::invalid_argument("MlpConfig: hidden_layers >= 1");
  if (c.width < 1) throw std::invalid_argument("MlpConfig: width >= 1");
}

// layer l fan-in/fan-out, l = 0..hidden_layers (last is the output layer)
int fan_in(const MlpConfig& c, int l) { return l == 0 ? c.in_dim : c.width; }
int fan_out(const MlpConfig& c, int l) { return l == c.hidden_layers ? c.out_dim : c.width; }

double unit_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace

std::size_t MlpConfig::weight_count() const {
  std::size_t n = 0;
  for (int l = 0; l <= hidden_layers; ++l)
    n += static_cast<std::size_t>(fan_out(*this, l)) * fan_in(*this, l) + fan_out(*this, l);
  return n;
}

const char* mode_name(Mode m) { return m == Mode::kForward ? "forward" : "inverse"; }

ParamVector init_params(const MlpConfig& config, Mode mode, std::span<const double> pde_param_init,
                        std::uint64_t seed) {
  validate(config);
  if (mode == Mode::kForward && !pde_param_init.empty())
    throw std::invalid_argument("init_params: forward mode takes no PDE parameters");

  ParamVector p;
  p.config = config;
  p.n_pde_params = static_cast<int>(pde_param_init.size());
  p.values.reserve(config.weight_count() + pde_param_init.size());

  std::mt19937_64 gen(seed);
  for (int l = 0; l <= config.hidden_layers; ++l) {
    const int fi = fan_in(config, l), fo = fan_out(config, l);
    const double bound = std::sqrt(6.0 / (fi + fo));
    for (int i = 0; i < fo * fi; ++i)
      p.values.push_back(bound * (2.0 * unit_uniform(gen) - 1.0));
    for (int i = 0; i < fo; ++i) p.values.push_back(0.0);
  }
  for (double v : pde_param_init) p.values.push_back(v);
  return p;
}

namespace {

template <typename ParamAt>
std::vector<VarHandle> forward_impl(Graph& g, const MlpConfig& config, ParamAt param_at,
                                    std::span<const VarHandle> inputs) {
  if (static_cast<int>(inputs.size()) != config.in_dim)
    throw std::invalid_argument("mlp_forward: input arity mismatch");

  std::vector<VarHandle> act(inputs.begin(), inputs.end());
  std::vector<VarHandle> next;
  std::size_t off = 0;
  for (int l = 0; l <= config.hidden_layers; ++l) {
    const int fi = fan_in(config, l), fo = fan_out(config, l);
    next.clear();
    next.reserve(fo);
    const std::size_t bias_off = off + static_cast<std::size_t>(fo) * fi;
    for (int j = 0; j < fo; ++j) {
      VarHandle acc = param_at(bias_off + j);
      for (int i = 0; i < fi; ++i)
        acc = g.muladd(param_at(off + static_cast<std::size_t>(j) * fi + i), act[i], acc);
      next.push_back(l == config.hidden_layers ? acc : g.tanh(acc));
    }
    act = next;
    off = bias_off + fo;
  }
  return act;
}

}  // namespace

std::vector<VarHandle> mlp_forward(Graph& g, const MlpConfig& config,
                                   std::span<const VarHandle> params,
                                   std::span<const VarHandle> inputs) {
  if (params.size() < config.weight_count())
    throw std::invalid_argument("mlp_forward: parameter handles missing");
  return forward_impl(g, config, [&](std::size_t i) { return params[i]; }, inputs);
}

std::vector<VarHandle> mlp_forward(Graph& g, const MlpConfig& config, VarHandle base,
                                   std::span<const VarHandle> inputs) {
  return forward_impl(
      g, config,
      [&](std::size_t i) { return VarHandle{base.index + static_cast<std::int32_t>(i)}; },
      inputs);
}

MlpEvaluator::MlpEvaluator(const MlpConfig& config, std::span<const double> params)
    : config_(config), params_(params) {
  if (params.size() < config.weight_count())
    throw std::invalid_argument("MlpEvaluator: parameter vector too short");
  buf_a_.resize(config.width);
  buf_b_.resize(config.width);
}

void MlpEvaluator::eval(std::span<const double> in, std::span<double> out) const {
  const double* act = in.data();
  std::size_t off = 0;
  for (int l = 0; l <= config_.hidden_layers; ++l) {
    const int fi = fan_in(config_, l), fo = fan_out(config_, l);
    double* dst = (l == config_.hidden_layers) ? out.data()
                  : (act == buf_a_.data())     ? buf_b_.data()
                                               : buf_a_.data();
    const double* w = params_.data() + off;
    const double* b = w + static_cast<std::size_t>(fo) * fi;
    for (int j = 0; j < fo; ++j) {
      double s = b[j];
      const double* wj = w + static_cast<std::size_t>(j) * fi;
      for (int i = 0; i < fi; ++i) s += wj[i] * act[i];
      dst[j] = (l == config_.hidden_layers) ? s : std::tanh(s);
    }
    act = dst;
    off += static_cast<std::size_t>(fo) * fi + fo;
  }
}

double MlpEvaluator::eval1(std::span<const double> in) const {
  double out;
  eval(in, {&out, 1});
  return out;
}

}  // namespace pinnfl
