#include "pinnfl/mlp.hpp"

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

using namespace pinnfl;

namespace {

// Lift every parameter onto the graph and run the network.
std::vector<VarHandle> emit_net(Graph& g, const ParamVector& p,
                                std::span<const double> inputs) {
  std::vector<VarHandle> ph;
  ph.reserve(p.values.size());
  for (double v : p.values) ph.push_back(g.param(v));
  std::vector<VarHandle> in;
  for (std::size_t i = 0; i < inputs.size(); ++i)
    in.push_back(g.input(inputs[i], static_cast<int>(i)));
  return mlp_forward(g, p.config, ph, in);
}

}  // namespace

TEST_SUITE("mlp") {

TEST_CASE("parameter counts") {
  MlpConfig burgers{2, 1, 8, 20};
  CHECK(burgers.weight_count() == 3021);
  auto fwd = init_params(burgers, Mode::kForward, {}, 0);
  CHECK(fwd.size() == 3021);

  const double init[] = {2.0, 0.0};
  auto inv = init_params(burgers, Mode::kInverse, init, 0);
  CHECK(inv.size() == 3023);
  CHECK(inv.values[3021] == 2.0);
  CHECK(inv.values[3022] == 0.0);
  CHECK(inv.pde_params()[0] == 2.0);

  CHECK(MlpConfig{2, 1, 3, 100}.weight_count() == 2 * 100 + 100 + 2 * (100 * 100 + 100) + 101);
  CHECK(MlpConfig{3, 1, 6, 64}.weight_count() ==
        3 * 64 + 64 + 5 * (64 * 64 + 64) + 64 + 1);
  CHECK(MlpConfig{3, 3, 6, 64}.weight_count() ==
        3 * 64 + 64 + 5 * (64 * 64 + 64) + 3 * 64 + 3);
}

TEST_CASE("seeded init is deterministic and Glorot-bounded") {
  MlpConfig c{2, 1, 2, 16};
  auto a = init_params(c, Mode::kForward, {}, 42);
  auto b = init_params(c, Mode::kForward, {}, 42);
  CHECK(a.values == b.values);
  auto other = init_params(c, Mode::kForward, {}, 43);
  CHECK(a.values != other.values);

  const double bound0 = std::sqrt(6.0 / (2 + 16));
  for (int i = 0; i < 2 * 16; ++i) CHECK(std::abs(a.values[i]) <= bound0);
  for (int i = 0; i < 16; ++i) CHECK(a.values[2 * 16 + i] == 0.0);  // biases
}

TEST_CASE("zero network maps to the zero jet") {
  MlpConfig c{2, 1, 2, 6};
  ParamVector p;
  p.config = c;
  p.values.assign(c.weight_count(), 0.0);
  Graph g(2);
  auto out = emit_net(g, p, std::vector<double>{0.3, -0.8});
  const Jet2& j = g.jet(out[0]);
  CHECK(j.v == 0.0);
  CHECK(j.g[0] == 0.0);
  CHECK(j.g[1] == 0.0);
  for (int s = 0; s < 3; ++s) CHECK(j.h[s] == 0.0);
}

TEST_CASE("width-1 identity-weights net is tanh") {
  MlpConfig c{1, 1, 1, 1};
  ParamVector p;
  p.config = c;
  p.values = {1.0, 0.0, 1.0, 0.0};  // W0=1, b0=0, W1=1, b1=0
  Graph g(1);
  auto out = emit_net(g, p, std::vector<double>{0.0});
  const Jet2& j = g.jet(out[0]);
  CHECK(j.v == doctest::Approx(0.0));
  CHECK(j.g[0] == doctest::Approx(1.0));
  CHECK(j.h[0] == doctest::Approx(0.0));
}

TEST_CASE("last layer is linear in its weights") {
  MlpConfig c{2, 1, 2, 5};
  auto p = init_params(c, Mode::kForward, {}, 3);
  auto doubled = p;
  const std::size_t out_block = c.weight_count() - (5 + 1);
  for (std::size_t i = out_block; i < c.weight_count(); ++i) doubled.values[i] *= 2.0;

  const std::vector<double> at{0.4, 0.9};
  Graph g1(2), g2(2);
  Jet2 j1 = g1.jet(emit_net(g1, p, at)[0]);
  Jet2 j2 = g2.jet(emit_net(g2, doubled, at)[0]);
  CHECK(j2.v == doctest::Approx(2.0 * j1.v));
  CHECK(j2.g[0] == doctest::Approx(2.0 * j1.g[0]));
  CHECK(j2.h[1] == doctest::Approx(2.0 * j1.h[1]));
}

TEST_CASE("forward jets match finite differences of the plain pass") {
  MlpConfig c{3, 3, 2, 10};
  auto p = init_params(c, Mode::kForward, {}, 11);
  MlpEvaluator ev(c, p.values);

  auto gen = oracles::rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> at{oracles::uniform(gen, -1, 1), oracles::uniform(gen, -1, 1),
                           oracles::uniform(gen, -1, 1)};
    Graph g(3);
    auto outs = emit_net(g, p, at);
    for (int ch = 0; ch < 3; ++ch) {
      const Jet2& j = g.jet(outs[ch]);
      std::vector<double> plain_out(3);
      ev.eval(at, plain_out);
      CHECK(oracles::rel_err(j.v, plain_out[ch]) < 1e-12);
      for (int i = 0; i < 3; ++i) {
        auto f1 = [&](double x) {
          auto q = at;
          q[i] = x;
          std::vector<double> o(3);
          ev.eval(q, o);
          return o[ch];
        };
        CHECK(oracles::rel_err(j.g[i], oracles::fd1(f1, at[i], 1e-5)) < 1e-4);
        CHECK(oracles::rel_err(j.h[hess_slot(i, i)], oracles::fd2(f1, at[i], 1e-3), 1e-6) < 1e-4);
      }
      // one mixed second derivative via nested differences
      auto fxy = [&](double x, double y) {
        auto q = at;
        q[0] = x;
        q[1] = y;
        std::vector<double> o(3);
        ev.eval(q, o);
        return o[ch];
      };
      const double h = 1e-4;
      const double mixed = (fxy(at[0] + h, at[1] + h) - fxy(at[0] + h, at[1] - h) -
                            fxy(at[0] - h, at[1] + h) + fxy(at[0] - h, at[1] - h)) /
                           (4 * h * h);
      CHECK(oracles::rel_err(j.h[hess_slot(0, 1)], mixed, 1e-6) < 1e-4);
    }
  }
}

TEST_CASE("argument validation") {
  MlpConfig c{2, 1, 1, 4};
  auto p = init_params(c, Mode::kForward, {}, 0);
  Graph g(1);
  std::vector<VarHandle> ph;
  for (double v : p.values) ph.push_back(g.param(v));
  std::vector<VarHandle> one_input{g.input(0.0, 0)};
  CHECK_THROWS_AS(mlp_forward(g, c, ph, one_input), std::invalid_argument);
  const double pde[] = {1.0};
  CHECK_THROWS_AS(init_params(c, Mode::kForward, pde, 0), std::invalid_argument);
}

}  // TEST_SUITE
