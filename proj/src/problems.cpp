#include "pinnfl/problems.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>

namespace pinnfl {
namespace {

constexpr double kPi = 3.14159265358979323846;

double unit_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;  // [0, 1)
}

double uniform_open(std::mt19937_64& gen, double lo, double hi) {
  double u;
  do {
    u = unit_uniform(gen);
  } while (u == 0.0);
  return lo + (hi - lo) * u;  // (lo, hi)
}

double uniform_closed(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * unit_uniform(gen);
}

int uniform_index(std::mt19937_64& gen, int n) {
  return static_cast<int>(unit_uniform(gen) * n) % n;
}

struct Domain {
  double xlo, xhi, ylo, yhi;
  bool has_y;
};

Domain domain_of(ProblemId id) {
  switch (id) {
    case ProblemId::kBurgers: return {-1.0, 1.0, 0.0, 0.0, false};
    case ProblemId::kTfmdwe: return {0.0, kPi, 0.0, 0.0, false};
    case ProblemId::kHeat2d: return {0.0, 1.0, 0.0, 1.0, true};
    case ProblemId::kNse: return {0.0, 2.0 * kPi, 0.0, 2.0 * kPi, true};
  }
  throw std::logic_error("unknown problem");
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

// ---- Gauss-Hermite nodes/weights (physicists' convention) ----
struct GaussHermite {
  std::vector<double> x, w;
};

GaussHermite gauss_hermite_compute(int n) {
  GaussHermite gh;
  gh.x.resize(n);
  gh.w.resize(n);
  const double eps = 1e-14;
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * gh.x[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * gh.x[1];
    else
      z = 2.0 * z - gh.x[i - 2];
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 0.7511255444649425;  // pi^{-1/4}
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= eps) break;
    }
    gh.x[i] = z;
    gh.x[n - 1 - i] = -z;
    gh.w[i] = 2.0 / (pp * pp);
    gh.w[n - 1 - i] = gh.w[i];
  }
  return gh;
}

const GaussHermite& gauss_hermite(int n) {
  static std::mutex mu;
  static std::map<int, GaussHermite> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_hermite_compute(n)).first;
  return it->second;
}

}  // namespace

const char* problem_name(ProblemId id) {
  switch (id) {
    case ProblemId::kBurgers: return "burgers";
    case ProblemId::kTfmdwe: return "tfmdwe";
    case ProblemId::kHeat2d: return "heat2d";
    case ProblemId::kNse: return "nse";
  }
  return "?";
}

ProblemId problem_from_name(const std::string& name) {
  if (name == "burgers") return ProblemId::kBurgers;
  if (name == "tfmdwe") return ProblemId::kTfmdwe;
  if (name == "heat2d") return ProblemId::kHeat2d;
  if (name == "nse") return ProblemId::kNse;
  throw std::invalid_argument("unknown problem id: " + name);
}

int ProblemSpec::in_dim() const {
  return (id == ProblemId::kHeat2d || id == ProblemId::kNse) ? 3 : 2;
}

int ProblemSpec::out_dim() const { return id == ProblemId::kNse ? 3 : 1; }

int ProblemSpec::seed_dims() const {
  switch (id) {
    case ProblemId::kBurgers: return 2;  // (t, x)
    case ProblemId::kTfmdwe: return 1;   // x only; time is handled by the L1 sum
    case ProblemId::kHeat2d:
    case ProblemId::kNse: return 3;  // (t, x, y)
  }
  return 0;
}

int ProblemSpec::pde_param_count() const {
  if (mode == Mode::kForward) return 0;
  return id == ProblemId::kBurgers ? 2 : 1;
}

std::vector<double> ProblemSpec::pde_param_init() const {
  if (mode == Mode::kForward) return {};
  switch (id) {
    case ProblemId::kBurgers: return {2.0, 0.0};
    case ProblemId::kTfmdwe: return {0.75};
    case ProblemId::kHeat2d: return {1.0};
    case ProblemId::kNse: return {0.1};
  }
  return {};
}

std::vector<double> ProblemSpec::pde_param_truth() const {
  if (mode == Mode::kForward) return {};
  switch (id) {
    case ProblemId::kBurgers: return {1.0, nu};
    case ProblemId::kTfmdwe: return {alpha};
    case ProblemId::kHeat2d: return {nu};
    case ProblemId::kNse: return {nu};
  }
  return {};
}

std::vector<std::string> ProblemSpec::pde_param_names() const {
  if (mode == Mode::kForward) return {};
  switch (id) {
    case ProblemId::kBurgers: return {"kappa1", "kappa2"};
    case ProblemId::kTfmdwe: return {"alpha"};
    case ProblemId::kHeat2d:
    case ProblemId::kNse: return {"kappa"};
  }
  return {};
}

void ProblemSpec::validate() const {
  if (t_final <= 0.0) throw std::invalid_argument("ProblemSpec: t_final must be positive");
  if (n_ic <= 0 || n_bc <= 0 || n_f <= 0)
    throw std::invalid_argument("ProblemSpec: sample counts must be positive");
  if (mode == Mode::kInverse && n_data <= 0)
    throw std::invalid_argument("ProblemSpec: n_data must be positive in inverse mode");
  if (id == ProblemId::kTfmdwe) {
    if (alpha <= 0.0 || alpha > 1.0)
      throw std::invalid_argument("ProblemSpec: alpha must lie in (0, 1]");
    if (k_nodes < 2) throw std::invalid_argument("ProblemSpec: k_nodes >= 2");
  }
  if (id != ProblemId::kTfmdwe && nu <= 0.0)
    throw std::invalid_argument("ProblemSpec: nu must be positive");
}

ProblemSpec default_spec(ProblemId id, Mode mode) {
  ProblemSpec s;
  s.id = id;
  s.mode = mode;
  switch (id) {
    case ProblemId::kBurgers:
      s.nu = 0.01 / kPi;
      s.n_ic = 100;
      s.n_bc = 100;
      s.n_f = 100;
      break;
    case ProblemId::kTfmdwe:
      s.alpha = 0.5;
      s.n_ic = 50;
      s.n_bc = 50;
      s.n_f = 100;
      s.k_nodes = 64;
      break;
    case ProblemId::kHeat2d:
      s.nu = 0.1;
      s.n_ic = 150;
      s.n_bc = 150;
      s.n_f = 400;
      break;
    case ProblemId::kNse:
      s.nu = 0.01;
      s.n_ic = 100;
      s.n_bc = 100;
      s.n_f = 300;
      break;
  }
  s.n_data = 100;
  return s;
}

SampleSet sample(const ProblemSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Domain dom = domain_of(spec.id);
  std::mt19937_64 gen(seed);
  SampleSet s;

  s.phy.reserve(spec.n_f);
  for (int i = 0; i < spec.n_f; ++i) {
    Point p{};
    p[0] = uniform_open(gen, 0.0, spec.t_final);
    p[1] = uniform_open(gen, dom.xlo, dom.xhi);
    if (dom.has_y) p[2] = uniform_open(gen, dom.ylo, dom.yhi);
    s.phy.push_back(p);
  }

  s.ic.reserve(spec.n_ic);
  for (int i = 0; i < spec.n_ic; ++i) {
    Point p{};
    p[1] = uniform_open(gen, dom.xlo, dom.xhi);
    if (dom.has_y) p[2] = uniform_open(gen, dom.ylo, dom.yhi);
    s.ic.push_back(p);
  }

  s.bc.reserve(spec.n_bc);
  const int faces = dom.has_y ? 4 : 2;
  for (int i = 0; i < spec.n_bc; ++i) {
    Point p{};
    p[0] = uniform_closed(gen, 0.0, spec.t_final);
    const int face = uniform_index(gen, faces);
    if (!dom.has_y) {
      p[1] = face == 0 ? dom.xlo : dom.xhi;
    } else {
      const double c = uniform_closed(gen, 0.0, 1.0);
      switch (face) {
        case 0: p[1] = dom.xlo; p[2] = dom.ylo + (dom.yhi - dom.ylo) * c; break;
        case 1: p[1] = dom.xhi; p[2] = dom.ylo + (dom.yhi - dom.ylo) * c; break;
        case 2: p[2] = dom.ylo; p[1] = dom.xlo + (dom.xhi - dom.xlo) * c; break;
        default: p[2] = dom.yhi; p[1] = dom.xlo + (dom.xhi - dom.xlo) * c; break;
      }
    }
    s.bc.push_back(p);
  }

  if (spec.mode == Mode::kInverse) {
    s.data.reserve(spec.n_data);
    s.data_values.reserve(spec.n_data);
    for (int i = 0; i < spec.n_data; ++i) {
      Point p{};
      p[0] = uniform_open(gen, 0.0, spec.t_final);
      p[1] = uniform_open(gen, dom.xlo, dom.xhi);
      if (dom.has_y) p[2] = uniform_open(gen, dom.ylo, dom.yhi);
      s.data.push_back(p);
      std::array<double, 3> val{};
      if (spec.id == ProblemId::kBurgers) {
        val[0] = reference_burgers(p[1], p[0], spec.nu);
      } else {
        const auto ex = exact_solution(spec, p);
        const int nc = observed_channels(spec);
        for (int c = 0; c < nc; ++c) val[c] = ex[c];
      }
      s.data_values.push_back(val);
    }
  }
  return s;
}

VarHandle residual_burgers(Graph& g, VarHandle u, VarHandle kappa1, VarHandle kappa2) {
  if (g.seed_dims() != 2) throw std::invalid_argument("residual_burgers: needs seeds (t, x)");
  VarHandle ut = g.dx(u, 0);
  VarHandle ux = g.dx(u, 1);
  VarHandle uxx = g.dxx(u, 1, 1);
  VarHandle adv = g.mul(kappa1, g.mul(u, ux));
  return g.sub(g.add(ut, adv), g.mul(kappa2, uxx));
}

VarHandle residual_heat2d(Graph& g, VarHandle u, VarHandle kappa) {
  if (g.seed_dims() != 3) throw std::invalid_argument("residual_heat2d: needs seeds (t, x, y)");
  VarHandle lap = g.add(g.dxx(u, 1, 1), g.dxx(u, 2, 2));
  return g.sub(g.dx(u, 0), g.mul(kappa, lap));
}

std::array<VarHandle, 3> residual_nse(Graph& g, VarHandle u, VarHandle v, VarHandle p,
                                      VarHandle nu) {
  if (g.seed_dims() != 3) throw std::invalid_argument("residual_nse: needs seeds (t, x, y)");
  auto momentum = [&](VarHandle q, VarHandle dp) {
    VarHandle conv = g.add(g.mul(u, g.dx(q, 1)), g.mul(v, g.dx(q, 2)));
    VarHandle visc = g.mul(nu, g.add(g.dxx(q, 1, 1), g.dxx(q, 2, 2)));
    return g.sub(g.add(g.add(g.dx(q, 0), conv), dp), visc);
  };
  VarHandle mx = momentum(u, g.dx(p, 1));
  VarHandle my = momentum(v, g.dx(p, 2));
  VarHandle div = g.add(g.dx(u, 1), g.dx(v, 2));
  return {mx, my, div};
}

VarHandle caputo_l1(Graph& g, const std::function<VarHandle(double)>& u_of_tau, double t,
                    VarHandle alpha, int k_nodes) {
  if (t <= 0.0) throw std::invalid_argument("caputo_l1: t must be positive");
  const double a = g.value(alpha);
  if (a <= 0.0 || a >= 1.0)
    throw EvalError(Opcode::kPowVar, alpha.index, "caputo_l1: alpha must lie in (0, 1)");
  if (k_nodes < 2) throw std::invalid_argument("caputo_l1: k_nodes >= 2");

  const double dtau = t / k_nodes;
  VarHandle one_m_alpha = g.sub(g.constant(1.0), alpha);

  std::vector<VarHandle> u(k_nodes + 1);
  for (int k = 0; k <= k_nodes; ++k) u[k] = u_of_tau(k == k_nodes ? t : dtau * k);

  // w_k = (t - tau_k)^{1-alpha} - (t - tau_{k+1})^{1-alpha}; the k = K-1
  // term loses its second power since t - tau_K = 0.
  VarHandle sum{};
  VarHandle next_pow{};
  for (int k = 0; k < k_nodes; ++k) {
    VarHandle pk = (k == 0) ? g.pow_var(g.constant(t), one_m_alpha) : next_pow;
    VarHandle pk1 = (k + 1 < k_nodes)
                        ? g.pow_var(g.constant(t - dtau * (k + 1)), one_m_alpha)
                        : g.constant(0.0);
    next_pow = pk1;
    VarHandle wk = g.sub(pk, pk1);
    VarHandle du = g.sub(u[k + 1], u[k]);
    sum = (k == 0) ? g.mul(wk, du) : g.muladd(wk, du, sum);
  }
  VarHandle gamma2ma = g.exp(g.lgamma(g.sub(g.constant(2.0), alpha)));
  return g.div(g.mul(sum, g.constant(1.0 / dtau)), gamma2ma);
}

double tfmdwe_forcing(double x, double t, double alpha) {
  const double gamma_ratio = std::exp(std::lgamma(4.0) - std::lgamma(4.0 - alpha));
  return (gamma_ratio * std::pow(t, 3.0 - alpha) + t * t * t) * std::sin(x);
}

VarHandle residual_tfmdwe(Graph& g, const std::function<VarHandle(double)>& u_of_tau,
                          VarHandle u_at, double x, double t, VarHandle alpha,
                          const ProblemSpec& spec) {
  VarHandle cap = caputo_l1(g, u_of_tau, t, alpha, spec.k_nodes);
  VarHandle uxx = g.dxx(u_at, 0, 0);
  VarHandle f = g.constant(tfmdwe_forcing(x, t, spec.alpha));
  return g.sub(g.sub(cap, uxx), f);
}

std::vector<double> exact_solution(const ProblemSpec& spec, const Point& p) {
  const double t = p[0], x = p[1], y = p[2];
  switch (spec.id) {
    case ProblemId::kTfmdwe:
      return {t * t * t * std::sin(x)};
    case ProblemId::kHeat2d:
      return {std::sin(kPi * x) * std::sin(kPi * y) *
              std::exp(-2.0 * kPi * kPi * spec.nu * t)};
    case ProblemId::kNse: {
      const double decay = std::exp(-2.0 * spec.nu * t);
      return {-std::cos(x) * std::sin(y) * decay, std::sin(x) * std::cos(y) * decay,
              -0.25 * (std::cos(2 * x) + std::cos(2 * y)) * std::exp(-4.0 * spec.nu * t)};
    }
    case ProblemId::kBurgers:
      throw std::invalid_argument("burgers has no closed form; use reference_burgers");
  }
  throw std::logic_error("unknown problem");
}

double reference_burgers(double x, double t, double nu, int quad_nodes) {
  if (t <= 0.0) return -std::sin(kPi * x);
  const auto& gh = gauss_hermite(quad_nodes);
  const double s = std::sqrt(4.0 * nu * t);
  const double c = 1.0 / (2.0 * kPi * nu);
  // stabilized ratio of Gauss-Hermite sums
  double emax = -1e300;
  for (int i = 0; i < quad_nodes; ++i) {
    const double eta = x - s * gh.x[i];
    emax = std::max(emax, -std::cos(kPi * eta) * c);
  }
  double num = 0.0, den = 0.0;
  for (int i = 0; i < quad_nodes; ++i) {
    const double eta = x - s * gh.x[i];
    const double f = std::exp(-std::cos(kPi * eta) * c - emax);
    num += gh.w[i] * std::sin(kPi * eta) * f;
    den += gh.w[i] * f;
  }
  return -num / den;
}

int observed_channels(const ProblemSpec& spec) { return spec.id == ProblemId::kNse ? 2 : 1; }

std::vector<double> boundary_value(const ProblemSpec& spec, const Point& p) {
  if (spec.id == ProblemId::kNse) {
    const auto ex = exact_solution(spec, p);
    return {ex[0], ex[1]};
  }
  return {0.0};
}

std::vector<double> initial_value(const ProblemSpec& spec, const Point& p) {
  switch (spec.id) {
    case ProblemId::kBurgers: return {-std::sin(kPi * p[1])};
    case ProblemId::kTfmdwe: return {0.0};
    case ProblemId::kHeat2d: return {std::sin(kPi * p[1]) * std::sin(kPi * p[2])};
    case ProblemId::kNse: {
      Point p0 = p;
      p0[0] = 0.0;
      const auto ex = exact_solution(spec, p0);
      return {ex[0], ex[1]};
    }
  }
  throw std::logic_error("unknown problem");
}

TestGrid test_grid(const ProblemSpec& spec) {
  TestGrid grid;
  auto push = [&](double t, double x, double y) {
    Point p{t, x, y};
    grid.points.push_back(p);
    std::array<double, 3> e{};
    if (spec.id == ProblemId::kBurgers) {
      e[0] = reference_burgers(x, t, spec.nu);
    } else {
      const auto ex = exact_solution(spec, p);
      for (std::size_t c = 0; c < ex.size(); ++c) e[c] = ex[c];
    }
    grid.exact.push_back(e);
  };

  switch (spec.id) {
    case ProblemId::kBurgers:
      for (double t : linspace(0.0, spec.t_final, 101))
        for (double x : linspace(-1.0, 1.0, 201)) push(t, x, 0.0);
      break;
    case ProblemId::kTfmdwe:
      for (double t : linspace(0.0, spec.t_final, 100))
        for (double x : linspace(0.0, kPi, 100)) push(t, x, 0.0);
      break;
    case ProblemId::kHeat2d:
      for (double t : linspace(0.0, spec.t_final, 10))
        for (double x : linspace(0.0, 1.0, 50))
          for (double y : linspace(0.0, 1.0, 50)) push(t, x, y);
      break;
    case ProblemId::kNse:
      for (double t : linspace(0.0, spec.t_final, 11))
        for (double x : linspace(0.0, 2.0 * kPi, 126))
          for (double y : linspace(0.0, 2.0 * kPi, 126)) push(t, x, y);
      break;
  }
  return grid;
}

}  // namespace pinnfl
