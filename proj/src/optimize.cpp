#include "qcontrol/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qcontrol/splitmix.hpp"

namespace qcontrol {

namespace {

struct GdRun {
  ApgResult apg;
};

GdRun run_gd_start(const ControlProblem& problem, double t_f, int segments, const GdConfig& cfg,
                   std::vector<double> init) {
  AdjointEngine engine(problem, cfg.propagation);
  const double dt = t_f / segments;
  Schedule s{{}, std::vector<double>(static_cast<std::size_t>(segments), dt)};

  ApgProblem p;
  p.weight = dt;
  p.project = [](std::vector<double>& u) { project_box(u, 0.0, 1.0); };
  p.value = [&](const std::vector<double>& u) {
    s.u = u;
    return engine.forward(s);
  };
  p.value_and_gradient = [&](const std::vector<double>& u, std::vector<double>& g) {
    s.u = u;
    return engine.cost_and_gradient(s, g);
  };
  ApgOptions opt;
  opt.max_iters = cfg.max_iters;
  opt.step_size = cfg.step_size;
  opt.stop_tol = cfg.stop_tol;
  return {accelerated_projected_gradient(p, std::move(init), opt)};
}

std::vector<double> initial_samples(const GdInit& init, int segments) {
  switch (init.kind) {
    case GdInitKind::Constant:
      return std::vector<double>(static_cast<std::size_t>(segments), init.value);
    case GdInitKind::Random:
      return random_protocol_samples(segments, init.seed);
    case GdInitKind::Provided:
      if (init.samples.size() != static_cast<std::size_t>(segments)) {
        throw std::invalid_argument("provided initial protocol has " + std::to_string(init.samples.size()) +
                                    " samples, expected " + std::to_string(segments));
      }
      return init.samples;
  }
  return {};
}

}  // namespace

void validate(const GdConfig& cfg) {
  if (!(cfg.step_size > 0.0)) throw std::invalid_argument("GdConfig.step_size must be > 0");
  if (!(cfg.stop_tol > 0.0)) throw std::invalid_argument("GdConfig.stop_tol must be > 0");
  if (cfg.max_iters < 0) throw std::invalid_argument("GdConfig.max_iters must be >= 0");
  if (cfg.restarts < 1) throw std::invalid_argument("GdConfig.restarts must be >= 1");
  if (cfg.init.kind == GdInitKind::Constant && !(cfg.init.value >= 0.0 && cfg.init.value <= 1.0)) {
    throw std::invalid_argument("GdConfig.init.value must be in [0, 1]");
  }
}

void validate(const QaoaConfig& cfg) {
  if (cfg.p < 1) throw std::invalid_argument("QaoaConfig.p must be >= 1");
  if (!(cfg.t_f > 0.0) || !std::isfinite(cfg.t_f)) throw std::invalid_argument("QaoaConfig.t_f must be > 0");
  if (!(cfg.step_size > 0.0)) throw std::invalid_argument("QaoaConfig.step_size must be > 0");
  if (!(cfg.stop_tol > 0.0)) throw std::invalid_argument("QaoaConfig.stop_tol must be > 0");
  if (cfg.max_iters < 0) throw std::invalid_argument("QaoaConfig.max_iters must be >= 0");
  if (cfg.init == QaoaInitKind::Trotter && !cfg.trotter_source) {
    throw std::invalid_argument("QaoaConfig.trotter_source is required for the Trotter init");
  }
  if (cfg.init == QaoaInitKind::Provided && !cfg.provided) {
    throw std::invalid_argument("QaoaConfig.provided is required for the Provided init");
  }
}

std::uint64_t start_seed(std::uint64_t seed, std::size_t index) {
  SplitMix64 rng(seed);
  std::uint64_t s = seed;
  for (std::size_t i = 0; i <= index; ++i) s = rng.next();
  return s;
}

std::vector<double> random_protocol_samples(int segments, std::uint64_t seed) {
  constexpr int kKnots = 8;
  SplitMix64 rng(seed);
  std::vector<double> knots(kKnots);
  for (auto& k : knots) k = rng.uniform01();
  std::vector<double> u(static_cast<std::size_t>(segments));
  for (int i = 0; i < segments; ++i) {
    const double pos = (i + 0.5) / segments * (kKnots - 1);
    const int a = std::min(static_cast<int>(pos), kKnots - 2);
    const double f = pos - a;
    u[static_cast<std::size_t>(i)] = (1.0 - f) * knots[static_cast<std::size_t>(a)] + f * knots[static_cast<std::size_t>(a) + 1];
  }
  return u;
}

GdResult gd_optimize(const ControlProblem& problem, double t_f, int segments, const GdConfig& cfg) {
  validate(cfg);
  if (!(t_f > 0.0) || !std::isfinite(t_f)) throw std::invalid_argument("gd_optimize needs t_f > 0");
  if (segments < 2) throw std::invalid_argument("gd_optimize needs at least 2 segments");
  validate(cfg.propagation, problem.mixer, problem.problem);

  std::function<GdRun(std::size_t, std::uint64_t)> run = [&](std::size_t i, std::uint64_t seed) {
    GdInit init = cfg.init;
    if (i > 0) init = {GdInitKind::Random, 0.5, seed, {}};
    return run_gd_start(problem, t_f, segments, cfg, initial_samples(init, segments));
  };
  std::function<double(const GdRun&)> energy = [](const GdRun& r) { return r.apg.value; };
  auto ms = multi_start(run, energy, cfg.restarts, cfg.seed, cfg.workers);

  const ApgResult& best = ms.best().apg;
  GdResult out{GridProtocol(t_f, best.x), {}, best.trace, best.converged, best.iterations, best.residual,
               ms.best_index, {}};
  out.sweep = phi_series(problem, out.protocol, cfg.propagation);
  for (const auto& r : ms.runs) {
    out.starts.push_back({r.apg.value, r.apg.converged, r.apg.iterations, r.apg.trace});
  }
  return out;
}

GdResult gd_optimize(const ProblemInstance& inst, double t_f, int segments, const GdConfig& cfg) {
  const ControlProblem problem = ControlProblem::from_instance(inst);
  return gd_optimize(problem, t_f, segments, cfg);
}

namespace {

double bang_cost_and_gradient(AdjointEngine& engine, const Schedule& s, std::vector<StateVector>& nodes,
                              std::vector<double>& g) {
  const double J = engine.forward(s, &nodes);
  const NodeTerms terms = engine.backward(s, nodes);
  g.resize(s.u.size());
  for (std::size_t j = 0; j < s.u.size(); ++j) {
    g[j] = -(s.u[j] * terms.phi_b[j + 1] + (1.0 - s.u[j]) * terms.phi_c[j + 1]);
  }
  return J;
}

}  // namespace

std::vector<double> bang_gradient(const ControlProblem& problem, const BangSequence& b, double* energy,
                                  const PropagationConfig& cfg) {
  AdjointEngine engine(problem, cfg);
  std::vector<StateVector> nodes;
  std::vector<double> g;
  const double J = bang_cost_and_gradient(engine, Schedule::from_bangs(b), nodes, g);
  if (energy) *energy = J;
  return g;
}

BangSequence pad_bangs(const BangSequence& b, int p) {
  if (p < b.pairs()) throw std::invalid_argument("pad_bangs cannot shrink a bang sequence");
  std::vector<Bang> segs = b.segments();
  const auto at = static_cast<std::ptrdiff_t>(2 * (b.pairs() / 2));
  const std::vector<Bang> zeros(static_cast<std::size_t>(2 * (p - b.pairs())), Bang{});
  std::vector<Bang> padded(segs.begin(), segs.begin() + at);
  for (std::size_t i = 0; i < zeros.size(); ++i) padded.push_back({i % 2 == 0 ? Level::Problem : Level::Mixer, 0.0});
  padded.insert(padded.end(), segs.begin() + at, segs.end());
  return BangSequence(b.t_f(), std::move(padded));
}

QaoaResult qaoa_optimize(const ControlProblem& problem, const QaoaConfig& cfg) {
  validate(cfg);
  validate(cfg.propagation, problem.mixer, problem.problem);
  BangSequence start = BangSequence::equal(cfg.t_f, cfg.p);
  if (cfg.init == QaoaInitKind::Trotter) {
    if (std::abs(cfg.trotter_source->t_f() - cfg.t_f) > 1e-12 * std::max(1.0, cfg.t_f)) {
      throw std::invalid_argument("trotter source protocol has a different t_f");
    }
    start = trotterize(*cfg.trotter_source, cfg.p);
  } else if (cfg.init == QaoaInitKind::Provided) {
    if (std::abs(cfg.provided->t_f() - cfg.t_f) > 1e-12 * std::max(1.0, cfg.t_f)) {
      throw std::invalid_argument("provided bang sequence has a different t_f");
    }
    start = pad_bangs(*cfg.provided, cfg.p);
  }

  AdjointEngine engine(problem, cfg.propagation);
  Schedule s = Schedule::from_bangs(start);
  std::vector<StateVector> nodes;
  ApgProblem p;
  p.weight = 1.0;
  p.project = [&](std::vector<double>& d) { project_scaled_simplex(d, cfg.t_f); };
  p.value = [&](const std::vector<double>& d) {
    s.duration = d;
    return engine.forward(s);
  };
  p.value_and_gradient = [&](const std::vector<double>& d, std::vector<double>& g) {
    s.duration = d;
    return bang_cost_and_gradient(engine, s, nodes, g);
  };
  ApgOptions opt;
  opt.max_iters = cfg.max_iters;
  opt.step_size = cfg.step_size;
  opt.stop_tol = cfg.stop_tol;
  ApgResult r = accelerated_projected_gradient(p, start.durations(), opt);

  return {BangSequence::from_durations(cfg.t_f, r.x), r.value, std::move(r.trace), r.converged, r.iterations,
          r.residual};
}

QaoaResult qaoa_optimize(const ProblemInstance& inst, const QaoaConfig& cfg) {
  const ControlProblem problem = ControlProblem::from_instance(inst);
  return qaoa_optimize(problem, cfg);
}

}  // namespace qcontrol
