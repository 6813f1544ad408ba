#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pinnfl/graph.hpp"

namespace pinnfl {

// Fully connected tanh network, identity output layer.
struct MlpConfig {
  int in_dim = 2;
  int out_dim = 1;
  int hidden_layers = 1;
  int width = 8;

  std::size_t weight_count() const;
  bool operator==(const MlpConfig&) const = default;
};

enum class Mode : std::uint8_t { kForward, kInverse };

const char* mode_name(Mode m);

// Flat parameter block: per layer, row-major weights then biases, with the
// trainable PDE parameters in trailing slots (inverse mode).
struct ParamVector {
  MlpConfig config;
  int n_pde_params = 0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  std::span<const double> pde_params() const {
    return {values.data() + config.weight_count(), static_cast<std::size_t>(n_pde_params)};
  }
  std::span<double> pde_params() {
    return {values.data() + config.weight_count(), static_cast<std::size_t>(n_pde_params)};
  }
};

// Glorot-uniform weights from a seeded deterministic generator, zero
// biases; PDE-parameter slots are copied verbatim.
ParamVector init_params(const MlpConfig& config, Mode mode, std::span<const double> pde_param_init,
                        std::uint64_t seed);

// Emits the network onto the graph. `params` must hold the weight/bias
// handles in layout order (PDE-parameter handles may trail; only the
// first weight_count() entries are read).
std::vector<VarHandle> mlp_forward(Graph& g, const MlpConfig& config,
                                   std::span<const VarHandle> params,
                                   std::span<const VarHandle> inputs);

// Same, with parameters occupying consecutive handles starting at `base`
// (as produced by Graph::params_bulk).
std::vector<VarHandle> mlp_forward(Graph& g, const MlpConfig& config, VarHandle base,
                                   std::span<const VarHandle> inputs);

// Plain-double forward pass for test grids and field dumps.
class MlpEvaluator {
 public:
  MlpEvaluator(const MlpConfig& config, std::span<const double> params);
  void eval(std::span<const double> in, std::span<double> out) const;
  double eval1(std::span<const double> in) const;

 private:
  MlpConfig config_;
  std::span<const double> params_;
  mutable std::vector<double> buf_a_, buf_b_;
};

}  // namespace pinnfl
