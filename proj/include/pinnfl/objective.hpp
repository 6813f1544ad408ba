#pragma once

#include <map>
#include <string>
#include <vector>

#include "pinnfl/mlp.hpp"
#include "pinnfl/problems.hpp"

namespace pinnfl {

// One evaluation of the equality-constrained problem: objective f,
// constraint vector h, their exact gradients, and the per-split losses.
// Forward mode: f = L_phy, h = [L_ic, L_bc]. Inverse mode: f = L_data,
// h = [L_phy, L_ic, L_bc].
struct LossBundle {
  double f = 0.0;
  std::vector<double> h;
  std::vector<double> grad_f;
  std::vector<std::vector<double>> jac_h;
  std::map<std::string, double> component_losses;

  int m() const { return static_cast<int>(h.size()); }
  int n() const { return static_cast<int>(grad_f.size()); }
  double total_component_loss() const;
};

struct SoftWeights {
  double phy = 1.0;
  double ic = 1.0;
  double bc = 1.0;
  double data = 1.0;
};

// Evaluates loss bundles for a fixed (spec, samples) pair. Holds per-worker
// scratch graphs so repeated evaluations do not reallocate. Point sums are
// reduced in a fixed block order: results are bit-identical for any worker
// count.
class Evaluator {
 public:
  Evaluator(const ProblemSpec& spec, SampleSet samples, int workers = 1,
            bool all_constraints = false);

  LossBundle evaluate(const ParamVector& params);

  // Weighted scalarization and its gradient (standard soft-penalty training).
  std::pair<double, std::vector<double>> soft_objective(const ParamVector& params,
                                                        const SoftWeights& w);

  const ProblemSpec& spec() const { return spec_; }
  const SampleSet& samples() const { return samples_; }

 private:
  struct SplitEval {
    double value = 0.0;
    std::vector<double> grad;
  };

  enum class Split { kPhy, kIc, kBc, kData };

  SplitEval eval_split(Split split, const ParamVector& params);
  double point_loss(Graph& g, Split split, const ParamVector& params, std::size_t index,
                    std::vector<double>& grad_scratch);

  struct Scratch {
    std::vector<Graph> graphs;  // one per seed arity
    std::vector<double> grad;
    Scratch() {
      for (int d = 0; d <= kMaxSeeds; ++d) graphs.emplace_back(d);
    }
  };

  ProblemSpec spec_;
  SampleSet samples_;
  int workers_;
  bool all_constraints_;
  std::vector<Scratch> scratch_;
};

// Single-shot conveniences over a throwaway Evaluator.
LossBundle evaluate(const ProblemSpec& spec, const ParamVector& params, const SampleSet& samples,
                    int workers = 1);

std::pair<double, std::vector<double>> soft_objective(const ProblemSpec& spec,
                                                      const ParamVector& params,
                                                      const SampleSet& samples,
                                                      const SoftWeights& weights,
                                                      int workers = 1);

}  // namespace pinnfl
