#include "pinnfl/objective.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace pinnfl {
namespace {

constexpr std::size_t kBlock = 16;  // points per reduction block

}  // namespace

double LossBundle::total_component_loss() const {
  double s = 0.0;
  for (const auto& [k, v] : component_losses) s += v;
  return s;
}

Evaluator::Evaluator(const ProblemSpec& spec, SampleSet samples, int workers,
                     bool all_constraints)
    : spec_(spec), samples_(std::move(samples)), workers_(std::max(1, workers)),
      all_constraints_(all_constraints) {
  spec_.validate();
  for (int w = 0; w < workers_; ++w) scratch_.emplace_back();
  if (all_constraints_ && spec_.mode == Mode::kInverse)
    throw std::invalid_argument(
        "all-constraints form is limited to forward mode (multiplier solve is m <= 3)");
}

double Evaluator::point_loss(Graph& g, Split split, const ParamVector& params, std::size_t index,
                             std::vector<double>& grad_scratch) {
  const Point* pt = nullptr;
  switch (split) {
    case Split::kPhy: pt = &samples_.phy[index]; break;
    case Split::kIc: pt = &samples_.ic[index]; break;
    case Split::kBc: pt = &samples_.bc[index]; break;
    case Split::kData: pt = &samples_.data[index]; break;
  }
  const Point& p = *pt;
  const MlpConfig& cfg = params.config;
  const VarHandle base = g.params_bulk(params.values);
  const auto pde_handle = [&](int j) {
    return VarHandle{base.index + static_cast<std::int32_t>(cfg.weight_count()) + j};
  };
  const bool inv = spec_.mode == Mode::kInverse;

  VarHandle loss{};
  if (split == Split::kPhy) {
    switch (spec_.id) {
      case ProblemId::kBurgers: {
        VarHandle in[2] = {g.input(p[0], 0), g.input(p[1], 1)};
        VarHandle u = mlp_forward(g, cfg, base, in)[0];
        VarHandle k1 = inv ? pde_handle(0) : g.constant(1.0);
        VarHandle k2 = inv ? pde_handle(1) : g.constant(spec_.nu);
        VarHandle r = residual_burgers(g, u, k1, k2);
        loss = g.mul(r, r);
        break;
      }
      case ProblemId::kHeat2d: {
        VarHandle in[3] = {g.input(p[0], 0), g.input(p[1], 1), g.input(p[2], 2)};
        VarHandle u = mlp_forward(g, cfg, base, in)[0];
        VarHandle kap = inv ? pde_handle(0) : g.constant(spec_.nu);
        VarHandle r = residual_heat2d(g, u, kap);
        loss = g.mul(r, r);
        break;
      }
      case ProblemId::kNse: {
        VarHandle in[3] = {g.input(p[0], 0), g.input(p[1], 1), g.input(p[2], 2)};
        auto out = mlp_forward(g, cfg, base, in);
        VarHandle nu = inv ? pde_handle(0) : g.constant(spec_.nu);
        auto r = residual_nse(g, out[0], out[1], out[2], nu);
        loss = g.muladd(r[2], r[2], g.muladd(r[1], r[1], g.mul(r[0], r[0])));
        break;
      }
      case ProblemId::kTfmdwe: {
        VarHandle x_in = g.input(p[1], 0);  // only x is seeded
        VarHandle alpha = inv ? pde_handle(0) : g.constant(spec_.alpha);
        const double t = p[0];
        VarHandle u_at{};
        auto u_of_tau = [&](double tau) -> VarHandle {
          VarHandle in[2] = {g.constant(tau), x_in};
          VarHandle u = mlp_forward(g, cfg, base, in)[0];
          if (tau == t) u_at = u;
          return u;
        };
        // Prime the evaluation at tau = t so u_xx reads the same node the
        // L1 sum ends on.
        u_of_tau(t);
        VarHandle cached_at = u_at;
        auto memo = [&](double tau) { return tau == t ? cached_at : u_of_tau(tau); };
        VarHandle r = residual_tfmdwe(g, memo, cached_at, p[1], t, alpha, spec_);
        loss = g.mul(r, r);
        break;
      }
    }
  } else {
    // value-only graphs: every coordinate enters as a constant
    std::vector<VarHandle> in;
    for (int i = 0; i < spec_.in_dim(); ++i) in.push_back(g.constant(p[i]));
    auto out = mlp_forward(g, cfg, base, in);
    std::vector<double> target;
    switch (split) {
      case Split::kIc: target = initial_value(spec_, p); break;
      case Split::kBc: target = boundary_value(spec_, p); break;
      case Split::kData: {
        const int nc = observed_channels(spec_);
        target.assign(samples_.data_values[index].begin(),
                      samples_.data_values[index].begin() + nc);
        break;
      }
      default: break;
    }
    for (std::size_t c = 0; c < target.size(); ++c) {
      VarHandle diff = g.sub(out[c], g.constant(target[c]));
      loss = (c == 0) ? g.mul(diff, diff) : g.muladd(diff, diff, loss);
    }
  }

  g.backward(loss, Selector::value(), grad_scratch);
  return g.value(loss);
}

Evaluator::SplitEval Evaluator::eval_split(Split split, const ParamVector& params) {
  std::size_t count = 0;
  switch (split) {
    case Split::kPhy: count = samples_.phy.size(); break;
    case Split::kIc: count = samples_.ic.size(); break;
    case Split::kBc: count = samples_.bc.size(); break;
    case Split::kData: count = samples_.data.size(); break;
  }
  const std::size_t n = params.size();
  const std::size_t nblocks = (count + kBlock - 1) / kBlock;
  std::vector<double> block_grad(nblocks * n, 0.0);
  std::vector<double> block_sum(nblocks, 0.0);

  const int d = (split == Split::kPhy) ? spec_.seed_dims() : 0;
  std::atomic<std::size_t> next{0};
  auto work = [&](int wid) {
    Scratch& sc = scratch_[wid];
    sc.grad.resize(n);
    for (;;) {
      const std::size_t blk = next.fetch_add(1);
      if (blk >= nblocks) break;
      Graph& g = sc.graphs[d];
      double* acc = block_grad.data() + blk * n;
      const std::size_t end = std::min(count, (blk + 1) * kBlock);
      for (std::size_t i = blk * kBlock; i < end; ++i) {
        g.clear();
        block_sum[blk] += point_loss(g, split, params, i, sc.grad);
        for (std::size_t k = 0; k < n; ++k) acc[k] += sc.grad[k];
      }
    }
  };

  const int nthreads = static_cast<int>(std::min<std::size_t>(workers_, nblocks));
  if (nthreads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nthreads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }

  // fixed-order reduction
  SplitEval out;
  out.grad.assign(n, 0.0);
  for (std::size_t blk = 0; blk < nblocks; ++blk) {
    out.value += block_sum[blk];
    const double* acc = block_grad.data() + blk * n;
    for (std::size_t k = 0; k < n; ++k) out.grad[k] += acc[k];
  }

  // mean over residual entries (channels x points)
  int channels = 1;
  if (split == Split::kPhy)
    channels = spec_.out_dim() == 3 ? 3 : 1;
  else
    channels = observed_channels(spec_);
  const double norm = 1.0 / (static_cast<double>(count) * channels);
  out.value *= norm;
  for (auto& v : out.grad) v *= norm;
  return out;
}

LossBundle Evaluator::evaluate(const ParamVector& params) {
  if (params.n_pde_params != spec_.pde_param_count())
    throw std::invalid_argument("evaluate: PDE parameter count mismatch");

  SplitEval phy = eval_split(Split::kPhy, params);
  SplitEval ic = eval_split(Split::kIc, params);
  SplitEval bc = eval_split(Split::kBc, params);

  LossBundle b;
  b.component_losses["phy"] = phy.value;
  b.component_losses["ic"] = ic.value;
  b.component_losses["bc"] = bc.value;

  if (spec_.mode == Mode::kForward) {
    if (all_constraints_) {
      b.f = 0.0;
      b.grad_f.assign(params.size(), 0.0);
      b.h = {phy.value, ic.value, bc.value};
      b.jac_h = {std::move(phy.grad), std::move(ic.grad), std::move(bc.grad)};
    } else {
      b.f = phy.value;
      b.grad_f = std::move(phy.grad);
      b.h = {ic.value, bc.value};
      b.jac_h = {std::move(ic.grad), std::move(bc.grad)};
    }
  } else {
    SplitEval data = eval_split(Split::kData, params);
    b.component_losses["data"] = data.value;
    b.f = data.value;
    b.grad_f = std::move(data.grad);
    b.h = {phy.value, ic.value, bc.value};
    b.jac_h = {std::move(phy.grad), std::move(ic.grad), std::move(bc.grad)};
  }
  return b;
}

std::pair<double, std::vector<double>> Evaluator::soft_objective(const ParamVector& params,
                                                                 const SoftWeights& w) {
  if (w.phy < 0 || w.ic < 0 || w.bc < 0 || w.data < 0)
    throw std::invalid_argument("soft_objective: weights must be nonnegative");
  SplitEval phy = eval_split(Split::kPhy, params);
  SplitEval ic = eval_split(Split::kIc, params);
  SplitEval bc = eval_split(Split::kBc, params);

  double value = w.phy * phy.value + w.ic * ic.value + w.bc * bc.value;
  std::vector<double> grad(params.size(), 0.0);
  for (std::size_t k = 0; k < grad.size(); ++k)
    grad[k] = w.phy * phy.grad[k] + w.ic * ic.grad[k] + w.bc * bc.grad[k];

  if (spec_.mode == Mode::kInverse) {
    SplitEval data = eval_split(Split::kData, params);
    value += w.data * data.value;
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += w.data * data.grad[k];
  }
  return {value, std::move(grad)};
}

LossBundle evaluate(const ProblemSpec& spec, const ParamVector& params, const SampleSet& samples,
                    int workers) {
  Evaluator ev(spec, samples, workers);
  return ev.evaluate(params);
}

std::pair<double, std::vector<double>> soft_objective(const ProblemSpec& spec,
                                                      const ParamVector& params,
                                                      const SampleSet& samples,
                                                      const SoftWeights& weights, int workers) {
  Evaluator ev(spec, samples, workers);
  return ev.soft_objective(params, weights);
}

}  // namespace pinnfl
