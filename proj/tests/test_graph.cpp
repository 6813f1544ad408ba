#include "pinnfl/graph.hpp"

#include <cmath>
#include <cstring>

#include "doctest.h"
#include "oracles.hpp"
#include "pinnfl/special.hpp"

using namespace pinnfl;

namespace {

// Builds expr(x) on a 1-seed graph and returns the output jet.
Jet2 eval_jet(const std::function<VarHandle(Graph&, VarHandle)>& expr, double x) {
  Graph g(1);
  VarHandle xn = g.input(x, 0);
  return g.jet(expr(g, xn));
}

void check_primitive_fd(const std::function<VarHandle(Graph&, VarHandle)>& expr,
                        const std::function<double(double)>& plain, double lo, double hi,
                        std::uint64_t seed) {
  auto gen = oracles::rng(seed);
  for (int trial = 0; trial < 100; ++trial) {
    const double x = oracles::uniform(gen, lo, hi);
    const Jet2 jet = eval_jet(expr, x);
    CHECK(oracles::rel_err(jet.v, plain(x)) < 1e-12);
    CHECK(oracles::rel_err(jet.g[0], oracles::fd1(plain, x, 1e-5)) < 1e-4);
    CHECK(oracles::rel_err(jet.h[0], oracles::fd2(plain, x, 1e-3), 1e-6) < 1e-4);
  }
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("input seeding") {
  Graph g(1);
  VarHandle x = g.input(3.0, 0);
  CHECK(g.jet(x).v == 3.0);
  CHECK(g.jet(x).g[0] == 1.0);
  CHECK(g.jet(x).h[0] == 0.0);

  Graph g2(2);
  VarHandle y = g2.input(0.5, 1);
  CHECK(g2.jet(y).g[0] == 0.0);
  CHECK(g2.jet(y).g[1] == 1.0);

  // two lifts of the same seed index are independent nodes
  const auto before = g2.size();
  g2.input(0.5, 1);
  g2.input(0.5, 1);
  CHECK(g2.size() == before + 2);

  CHECK_THROWS_AS(g.input(1.0, 1), std::out_of_range);
}

TEST_CASE("param registration order") {
  Graph g(1);
  g.param(1.5);
  CHECK(g.jet(VarHandle{0}).v == 1.5);
  CHECK(g.jet(VarHandle{0}).g[0] == 0.0);
  VarHandle b = g.param(-2.0);
  VarHandle c = g.param(0.25);
  CHECK(g.param_nodes()[1] == b.index);
  CHECK(g.param_nodes()[2] == c.index);
  VarHandle out = g.mul(b, c);
  CHECK(g.backward(out).size() == 3);
}

TEST_CASE("hand-chained jets") {
  // x*x at x=3, d=1
  Graph g(1);
  VarHandle x = g.input(3.0, 0);
  Jet2 sq = g.jet(g.mul(x, x));
  CHECK(sq.v == doctest::Approx(9.0));
  CHECK(sq.g[0] == doctest::Approx(6.0));
  CHECK(sq.h[0] == doctest::Approx(2.0));

  // tanh at 0
  Graph g2(1);
  Jet2 th = g2.jet(g2.tanh(g2.input(0.0, 0)));
  CHECK(th.v == 0.0);
  CHECK(th.g[0] == doctest::Approx(1.0));
  CHECK(th.h[0] == doctest::Approx(0.0));
}

TEST_CASE("lgamma jet at 1") {
  Graph g(1);
  Jet2 lg = g.jet(g.lgamma(g.input(1.0, 0)));
  CHECK(lg.v == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(lg.g[0] == doctest::Approx(-0.5772156649).epsilon(1e-9));
  CHECK(lg.g[0] == doctest::Approx(oracles::digamma_reference(1.0)).epsilon(1e-12));
}

TEST_CASE("special functions vs reference") {
  auto gen = oracles::rng(7);
  for (int i = 0; i < 50; ++i) {
    const double x = oracles::uniform(gen, 0.05, 30.0);
    CHECK(oracles::rel_err(digamma(x), oracles::digamma_reference(x)) < 1e-11);
    CHECK(oracles::rel_err(trigamma(x),
                           oracles::fd1([](double t) { return oracles::digamma_reference(t); },
                                        x, 1e-5)) < 1e-6);
    CHECK(oracles::rel_err(polygamma2(x),
                           oracles::fd2([](double t) { return oracles::digamma_reference(t); },
                                        x, 1e-3),
                           1e-6) < 1e-5);
  }
}

TEST_CASE("primitive jets match finite differences") {
  check_primitive_fd([](Graph& g, VarHandle x) { return g.tanh(x); },
                     [](double x) { return std::tanh(x); }, -3.0, 3.0, 1);
  check_primitive_fd([](Graph& g, VarHandle x) { return g.sin(x); },
                     [](double x) { return std::sin(x); }, -3.0, 3.0, 2);
  check_primitive_fd([](Graph& g, VarHandle x) { return g.cos(x); },
                     [](double x) { return std::cos(x); }, -3.0, 3.0, 3);
  check_primitive_fd([](Graph& g, VarHandle x) { return g.exp(x); },
                     [](double x) { return std::exp(x); }, -2.0, 2.0, 4);
  check_primitive_fd([](Graph& g, VarHandle x) { return g.log(x); },
                     [](double x) { return std::log(x); }, 0.2, 5.0, 5);
  check_primitive_fd([](Graph& g, VarHandle x) { return g.neg(x); },
                     [](double x) { return -x; }, -3.0, 3.0, 6);
  check_primitive_fd([](Graph& g, VarHandle x) { return g.lgamma(x); },
                     [](double x) { return std::lgamma(x); }, 0.3, 8.0, 7);
  check_primitive_fd([](Graph& g, VarHandle x) { return g.pow_const(x, 2.7); },
                     [](double x) { return std::pow(x, 2.7); }, 0.5, 4.0, 8);
  // binaries driven through one seed: op(x, c), op(c, x), op(x, x)
  check_primitive_fd([](Graph& g, VarHandle x) { return g.add(x, g.mul(x, x)); },
                     [](double x) { return x + x * x; }, -3.0, 3.0, 9);
  check_primitive_fd([](Graph& g, VarHandle x) { return g.sub(g.constant(1.0), g.mul(x, x)); },
                     [](double x) { return 1.0 - x * x; }, -3.0, 3.0, 10);
  check_primitive_fd([](Graph& g, VarHandle x) { return g.div(g.sin(x), x); },
                     [](double x) { return std::sin(x) / x; }, 0.5, 3.0, 11);
  check_primitive_fd([](Graph& g, VarHandle x) { return g.pow_var(x, g.sin(x)); },
                     [](double x) { return std::pow(x, std::sin(x)); }, 0.5, 3.0, 12);
}

TEST_CASE("backward product rule") {
  Graph g(0);
  VarHandle t1 = g.param(2.0);
  VarHandle t2 = g.param(3.0);
  auto grad = g.backward(g.mul(t1, t2));
  CHECK(grad[0] == doctest::Approx(3.0));
  CHECK(grad[1] == doctest::Approx(2.0));
}

TEST_CASE("backward of a grad component") {
  // f = tanh(theta * x); select d/dx of the output, differentiate in theta.
  // d/dtheta [theta sech^2(theta x)] at theta=0, x=1 equals 1.
  Graph g(1);
  VarHandle theta = g.param(0.0);
  VarHandle x = g.input(1.0, 0);
  VarHandle out = g.tanh(g.mul(theta, x));
  auto grad = g.backward(out, Selector::grad(0));
  CHECK(grad[0] == doctest::Approx(1.0));
}

TEST_CASE("backward matches finite differences on a composite") {
  auto build = [](Graph& g, std::span<const VarHandle> p) {
    VarHandle x = g.input(0.7, 0);
    VarHandle inner = g.add(g.mul(p[0], x), p[1]);
    VarHandle a = g.tanh(inner);
    VarHandle b = g.mul(g.sin(p[2]), g.exp(g.mul(p[3], g.constant(0.2))));
    return g.add(g.mul(a, b), g.div(p[4], g.add(g.mul(p[0], p[0]), g.constant(1.0))));
  };
  const std::vector<double> point{0.4, -0.3, 1.2, 0.8, -1.1};
  auto rep = gradcheck(build, 1, point, 1e-5);
  CHECK(rep.max_rel_err < 1e-5);
}

TEST_CASE("backward through derivative extraction") {
  // u = tanh(theta x); f = (du/dx)^2 assembled via dx-extraction.
  // Plain form: f(theta) = (theta sech^2(theta x))^2 at x = 0.9.
  const double x0 = 0.9;
  auto plain = [x0](const std::vector<double>& p) {
    const double s = 1.0 - std::tanh(p[0] * x0) * std::tanh(p[0] * x0);
    const double ux = p[0] * s;
    return ux * ux;
  };
  std::vector<double> theta{0.6};
  const auto fd = oracles::fd_gradient(plain, theta, 1e-6);

  Graph g(1);
  VarHandle th = g.param(theta[0]);
  VarHandle x = g.input(x0, 0);
  VarHandle u = g.tanh(g.mul(th, x));
  VarHandle ux = g.dx(u, 0);
  auto grad = g.backward(g.mul(ux, ux));
  CHECK(oracles::rel_err(grad[0], fd[0]) < 1e-7);

  // second-derivative extraction: f = u_xx, df/dtheta vs FD
  auto plain2 = [x0](const std::vector<double>& p) {
    const double t = std::tanh(p[0] * x0);
    const double s = 1.0 - t * t;
    return -2.0 * p[0] * p[0] * t * s;  // u_xx
  };
  const auto fd2 = oracles::fd_gradient(plain2, theta, 1e-6);
  Graph g2(1);
  VarHandle th2 = g2.param(theta[0]);
  VarHandle u2 = g2.tanh(g2.mul(th2, g2.input(x0, 0)));
  auto grad2 = g2.backward(g2.dxx(u2, 0, 0));
  CHECK(oracles::rel_err(grad2[0], fd2[0]) < 1e-7);
}

TEST_CASE("extraction jets carry mixed second derivatives") {
  // u = sin(x) * cos(y), d=2; dx(u,0) must expose (u_x, [u_xx, u_xy]).
  Graph g(2);
  VarHandle x = g.input(0.7, 0);
  VarHandle y = g.input(-0.4, 1);
  VarHandle u = g.mul(g.sin(x), g.cos(y));
  VarHandle ux = g.dx(u, 0);
  CHECK(g.jet(ux).v == doctest::Approx(std::cos(0.7) * std::cos(-0.4)));
  CHECK(g.jet(ux).g[0] == doctest::Approx(-std::sin(0.7) * std::cos(-0.4)));
  CHECK(g.jet(ux).g[1] == doctest::Approx(-std::cos(0.7) * std::sin(-0.4)));
  CHECK(g.jet(g.dxx(u, 0, 1)).v == doctest::Approx(-std::cos(0.7) * std::sin(-0.4)));
}

TEST_CASE("evaluation is deterministic") {
  auto run = [] {
    Graph g(2);
    VarHandle x = g.input(0.123456, 0);
    VarHandle y = g.input(-1.5, 1);
    VarHandle p = g.param(0.777);
    VarHandle out = g.tanh(g.add(g.mul(p, g.sin(x)), g.exp(g.mul(y, g.constant(0.3)))));
    Jet2 j = g.jet(out);
    auto grad = g.backward(out, Selector::hess(0, 1));
    return std::make_pair(j, grad);
  };
  auto [j1, grad1] = run();
  auto [j2, grad2] = run();
  CHECK(std::memcmp(&j1, &j2, sizeof(Jet2)) == 0);
  CHECK(grad1 == grad2);
}

TEST_CASE("domain and finiteness errors") {
  Graph g(1);
  VarHandle x = g.input(-1.0, 0);
  CHECK_THROWS_AS(g.log(x), EvalError);
  CHECK_THROWS_AS(g.lgamma(x), EvalError);
  CHECK_THROWS_AS(g.pow_var(x, x), EvalError);
  CHECK_THROWS_AS(g.div(x, g.constant(0.0)), EvalError);
  CHECK_THROWS_AS(g.exp(g.constant(1000.0)), EvalError);  // overflow -> non-finite
  try {
    g.div(x, g.constant(0.0));
    CHECK(false);
  } catch (const EvalError& e) {
    CHECK(e.op == Opcode::kDiv);
    CHECK(e.node >= 0);
  }
}

TEST_CASE("gradcheck reports") {
  // linear: FD is exact up to roundoff
  auto lin = [](Graph& g, std::span<const VarHandle> p) {
    return g.mul(p[0], g.constant(3.0));
  };
  auto rep = gradcheck(lin, 0, std::vector<double>{1.7}, 1e-5);
  CHECK(rep.max_rel_err < 1e-10);

  // quadratic at theta=1 with step 1e-5
  auto quad = [](Graph& g, std::span<const VarHandle> p) { return g.mul(p[0], p[0]); };
  auto rep2 = gradcheck(quad, 0, std::vector<double>{1.0}, 1e-5);
  CHECK(rep2.max_rel_err < 1e-9);
}

TEST_CASE("apply dispatch") {
  Graph g(1);
  VarHandle x = g.input(0.5, 0);
  VarHandle args[] = {x, x};
  VarHandle m = g.apply(Opcode::kMul, args);
  CHECK(g.value(m) == doctest::Approx(0.25));
  VarHandle one[] = {m};
  CHECK(g.value(g.apply(Opcode::kPowConst, one, 0.5)) == doctest::Approx(0.5));
  CHECK_THROWS(g.apply(Opcode::kParam, one));
}

}  // TEST_SUITE
