#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pinnfl/graph.hpp"
#include "pinnfl/mlp.hpp"

namespace pinnfl {

enum class ProblemId : std::uint8_t { kBurgers, kTfmdwe, kHeat2d, kNse };

const char* problem_name(ProblemId id);
ProblemId problem_from_name(const std::string& name);

// Benchmark definition: domain, constants, sampling counts. Defaults are
// desk-scale; counts can be raised to the reference settings via config.
struct ProblemSpec {
  ProblemId id = ProblemId::kBurgers;
  Mode mode = Mode::kForward;
  double t_final = 1.0;
  double nu = 0.01 / 3.14159265358979323846;  // viscosity / diffusivity
  double alpha = 0.5;                         // tfmdwe fractional order
  int n_ic = 100;
  int n_bc = 100;
  int n_f = 100;
  int n_data = 100;
  int k_nodes = 64;  // caputo L1 sub-intervals

  int in_dim() const;     // network input arity: (t, x[, y])
  int out_dim() const;    // 1, or 3 for nse (u, v, p)
  int seed_dims() const;  // seeds needed by the residual operator
  int pde_param_count() const;
  std::vector<double> pde_param_init() const;
  std::vector<double> pde_param_truth() const;
  std::vector<std::string> pde_param_names() const;
  void validate() const;
};

ProblemSpec default_spec(ProblemId id, Mode mode);

using Point = std::array<double, 3>;  // (t, x[, y]); unused slots zero

struct SampleSet {
  std::vector<Point> phy;
  std::vector<Point> ic;
  std::vector<Point> bc;
  std::vector<Point> data;
  std::vector<std::array<double, 3>> data_values;  // observed channels per data point
};

// Uniform i.i.d. samples per split from a seeded deterministic generator.
// In inverse mode data values are filled from the exact (or Burgers
// reference) solution.
SampleSet sample(const ProblemSpec& spec, std::uint64_t seed);

// ---- residual operators (graph scalars; parameter gradients flow) ----

// u seeded with (t, x) = seeds (0, 1)
VarHandle residual_burgers(Graph& g, VarHandle u, VarHandle kappa1, VarHandle kappa2);

// u seeded with (t, x, y) = seeds (0, 1, 2)
VarHandle residual_heat2d(Graph& g, VarHandle u, VarHandle kappa);

// (u, v, p) seeded with (t, x, y); returns (momentum-x, momentum-y, divergence)
std::array<VarHandle, 3> residual_nse(Graph& g, VarHandle u, VarHandle v, VarHandle p,
                                      VarHandle nu);

// L1 discretization of the Caputo derivative of order alpha at time t.
// `u_of_tau` emits u(., tau) onto the graph for any tau in [0, t].
VarHandle caputo_l1(Graph& g, const std::function<VarHandle(double)>& u_of_tau, double t,
                    VarHandle alpha, int k_nodes);

// Caputo(u) - u_xx - f(x, t); `u_xx` comes from `u_at` (seeded in x),
// the forcing always uses the true alpha from `spec`.
VarHandle residual_tfmdwe(Graph& g, const std::function<VarHandle(double)>& u_of_tau,
                          VarHandle u_at, double x, double t, VarHandle alpha,
                          const ProblemSpec& spec);

double tfmdwe_forcing(double x, double t, double alpha);

// Closed-form solutions (tfmdwe, heat2d, nse). Burgers has none; use
// reference_burgers.
std::vector<double> exact_solution(const ProblemSpec& spec, const Point& p);

// Cole-Hopf solution for u0 = -sin(pi x) evaluated by Gauss-Hermite
// quadrature; exact IC at t = 0.
double reference_burgers(double x, double t, double nu, int quad_nodes = 96);

// Observable solution channels: velocities only for nse (pressure is
// defined up to a constant), the single field otherwise.
int observed_channels(const ProblemSpec& spec);

// Dirichlet boundary / initial values per observed channel.
std::vector<double> boundary_value(const ProblemSpec& spec, const Point& p);
std::vector<double> initial_value(const ProblemSpec& spec, const Point& p);

// ---- evaluation grids for metrics and field dumps ----

struct TestGrid {
  std::vector<Point> points;
  std::vector<std::array<double, 3>> exact;  // per out_dim channel
};

TestGrid test_grid(const ProblemSpec& spec);

}  // namespace pinnfl
