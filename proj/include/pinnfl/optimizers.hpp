#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinnfl/objective.hpp"

namespace pinnfl {

enum class OptimizerId : std::uint8_t { kAdam, kFl, kFlMomentum, kAdamFlip, kAdamFlipV2 };

const char* optimizer_name(OptimizerId id);
OptimizerId optimizer_from_name(const std::string& name);

enum class StepSchedule : std::uint8_t {
  kConstant,  // eta_t = eta
  kSqrtLog,   // eta_t = eta / (sqrt(t) * log(t + 1))
};

const char* schedule_name(StepSchedule s);
StepSchedule schedule_from_name(const std::string& name);

struct GainConfig {
  double kappa = 1000.0;          // feedback gain K = kappa * I
  std::vector<double> kappa_diag; // optional per-constraint gains
  double eps_damp = 1e-8;         // Gram damping
  double delta = 1e-8;            // denominator constant
  double beta1 = 0.95;
  double beta2 = 0.999;
  double eta = 1e-3;
  StepSchedule schedule = StepSchedule::kConstant;

  double stepsize(std::int64_t t) const;
  double gain(int constraint) const;
  void validate(int m) const;
};

struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  std::vector<double> v_bar;  // AMSGrad-style variant only
  std::int64_t t = 0;
  std::vector<double> last_lambda;
  int damping_escalations = 0;  // deviation flag for the metric-consistent solve

  static OptimizerState init(std::size_t n);
};

// Thrown when the damped Gram solve stays non-positive-definite after the
// escalation retries.
class SingularConstraintError : public std::runtime_error {
 public:
  explicit SingularConstraintError(std::vector<double> gram);
  std::vector<double> gram;  // row-major m x m
};

// lambda = -(J M J^T + eps I)^{-1} (J M grad_f - K h), with M a diagonal
// metric (identity when absent). Cholesky on the m x m Gram matrix; on
// failure eps escalates (x10, floor 1e-8) up to 3 times.
std::vector<double> solve_multiplier(std::span<const std::vector<double>> jac_h,
                                     std::span<const double> grad_f, std::span<const double> h,
                                     std::span<const double> gains, double eps_damp,
                                     std::span<const double> metric = {},
                                     int* escalations = nullptr);

// Feedback-linearized gradient: grad_f + J^T lambda.
std::vector<double> fl_gradient(const LossBundle& bundle, const GainConfig& cfg,
                                std::span<const double> metric = {}, int* escalations = nullptr,
                                std::vector<double>* lambda_out = nullptr);

// theta <- theta - eta (grad_f + J^T lambda), identity metric.
void fl_step(ParamVector& params, const LossBundle& bundle, const GainConfig& cfg,
             OptimizerState& state);

// Momentum accumulation as printed: m <- beta1 m + g (no normalization).
void fl_momentum_step(ParamVector& params, const LossBundle& bundle, const GainConfig& cfg,
                      OptimizerState& state);

// Adam-style moments on the feedback-linearized gradient.
void adamflip_step(ParamVector& params, const LossBundle& bundle, const GainConfig& cfg,
                   OptimizerState& state);

// Metric-consistent variant with the monotone second moment: the
// multiplier is solved in the same diagonal metric D_t that preconditions
// the update, and eta_t follows the configured schedule.
void adamflip_variant_step(ParamVector& params, const LossBundle& bundle, const GainConfig& cfg,
                           OptimizerState& state);

// Plain Adam on an arbitrary gradient (soft-penalty baseline).
void adam_step(ParamVector& params, std::span<const double> grad, const GainConfig& cfg,
               OptimizerState& state);

struct KktResidual {
  double value = 0.0;              // ||r||^2 + ||h||_1
  double stationarity_sq = 0.0;    // ||r||^2
  double feasibility_l1 = 0.0;     // ||h||_1
  std::vector<double> r;
};

// r = grad_f + J^T lambda_dagger with lambda_dagger = -(J D J^T)^{-1} J D grad_f.
KktResidual kkt_residual(const LossBundle& bundle, std::span<const double> metric = {},
                         double eps_damp = 0.0);

// D_t diagonal for the variant: 1 / (sqrt(v_bar) + delta).
std::vector<double> variant_metric(const OptimizerState& state, const GainConfig& cfg,
                                   std::size_t n);

}  // namespace pinnfl
