#include "qcontrol/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace qcontrol {

namespace {

template <class R, class F>
std::vector<R> parallel_map(std::size_t n, int workers, F&& f) {
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

SegmentKind nearest_kind(double u, double eps_u) {
  if (u <= eps_u) return SegmentKind::Bang0;
  if (u >= 1.0 - eps_u) return SegmentKind::Bang1;
  return SegmentKind::Singular;
}

}  // namespace

const char* to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::Bang0:
      return "bang0";
    case SegmentKind::Bang1:
      return "bang1";
    case SegmentKind::Singular:
      return "singular";
  }
  return "?";
}

std::vector<StructureBlock> ProtocolStructure::blocks() const {
  std::vector<StructureBlock> out;
  const double dt = t_f / segments;
  int first = 0;
  for (int i = 1; i <= segments; ++i) {
    if (i == segments || classes[static_cast<std::size_t>(i)] != classes[static_cast<std::size_t>(first)]) {
      out.push_back({classes[static_cast<std::size_t>(first)], dt * first, i == segments ? t_f : dt * i, first, i});
      first = i;
    }
  }
  return out;
}

int ProtocolStructure::singular_count() const {
  return static_cast<int>(std::count(classes.begin(), classes.end(), SegmentKind::Singular));
}

double ProtocolStructure::singular_coverage() const {
  const int total = singular_count();
  if (total == 0 || singular_match_mask.empty()) return 0.0;
  int best = 0, run = 0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == SegmentKind::Singular && singular_match_mask[i]) {
      best = std::max(best, ++run);
    } else if (classes[i] == SegmentKind::Singular) {
      run = 0;
    }
  }
  return static_cast<double>(best) / total;
}

std::optional<double> singular_u_star(const OperatorHandle& B, const OperatorHandle& C, const StateVector& x,
                                      const StateVector& k) {
  const double bcb = nested_commutator_phi(B, C, x, k, CommutatorTerm::BCB);
  const double bcc = nested_commutator_phi(B, C, x, k, CommutatorTerm::BCC);
  const double den = bcc - bcb;
  if (std::abs(den) < 1e-12) return std::nullopt;
  return bcc / den;
}

ProtocolStructure detect_structure(const GridProtocol& g, const SweepResult& sweep, double eps_u, double eps_phi,
                                   const ControlProblem* problem, double match_tol) {
  const int m = g.segments();
  if (sweep.phi.size() != static_cast<std::size_t>(m)) {
    throw std::invalid_argument("sweep and protocol have different segment counts");
  }
  if (!(eps_u >= 0.0 && eps_u < 0.5) || !(eps_phi >= 0.0)) throw std::invalid_argument("invalid structure tolerances");
  ProtocolStructure s;
  s.t_f = g.t_f();
  s.segments = m;
  s.match_tol = match_tol;
  s.classes.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const double u = g[si], phi = sweep.phi[si];
    const SegmentKind kind = nearest_kind(u, eps_u);
    s.classes[si] = kind;
    const bool ok = (kind == SegmentKind::Bang0 && phi >= -eps_phi) || (kind == SegmentKind::Bang1 && phi <= eps_phi) ||
                    (kind == SegmentKind::Singular && std::abs(phi) <= eps_phi);
    if (!ok) s.flagged.push_back(i);
  }

  auto all = s.blocks();
  std::size_t lo = 0, hi = all.size();
  if (all.front().kind == SegmentKind::Bang0) {
    s.initial_bang_length = all.front().t_end - all.front().t_start;
    lo = 1;
  }
  if (hi > lo && all.back().kind == SegmentKind::Bang1) {
    s.final_bang_length = all.back().t_end - all.back().t_start;
    --hi;
  }
  s.interior.assign(all.begin() + static_cast<std::ptrdiff_t>(lo), all.begin() + static_cast<std::ptrdiff_t>(hi));

  if (problem) {
    if (sweep.x_trajectory.size() != static_cast<std::size_t>(m) + 1 ||
        sweep.k_trajectory.size() != static_cast<std::size_t>(m) + 1) {
      throw std::invalid_argument("singular matching needs stored x and k trajectories");
    }
    s.singular_match_mask.assign(static_cast<std::size_t>(m), false);
    for (std::size_t i = 0; i < static_cast<std::size_t>(m); ++i) {
      if (s.classes[i] != SegmentKind::Singular) continue;
      const auto a = singular_u_star(problem->mixer, problem->problem, sweep.x_trajectory[i], sweep.k_trajectory[i]);
      const auto b =
          singular_u_star(problem->mixer, problem->problem, sweep.x_trajectory[i + 1], sweep.k_trajectory[i + 1]);
      if (!a || !b) continue;
      s.singular_match_mask[i] = std::abs(g[i] - 0.5 * (*a + *b)) <= match_tol;
    }
  }
  return s;
}

GridProtocol resynthesize(const ProtocolStructure& s, const GridProtocol& g) {
  std::vector<double> u(g.samples());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (s.classes[i] == SegmentKind::Bang0) u[i] = 0.0;
    if (s.classes[i] == SegmentKind::Bang1) u[i] = 1.0;
  }
  return GridProtocol(g.t_f(), std::move(u));
}

nlohmann::json to_json(const ProtocolStructure& s) {
  nlohmann::ordered_json doc;
  doc["schema"] = kStructureSchema;
  doc["t_f"] = s.t_f;
  doc["segments"] = s.segments;
  doc["initial_bang"] = {{"level", 0}, {"length", s.initial_bang_length}};
  doc["final_bang"] = {{"level", 1}, {"length", s.final_bang_length}};
  nlohmann::ordered_json interior = nlohmann::ordered_json::array();
  for (const auto& b : s.interior) {
    interior.push_back({{"kind", to_string(b.kind)}, {"t_start", b.t_start}, {"t_end", b.t_end}});
  }
  doc["interior"] = interior;
  doc["flagged"] = s.flagged;
  doc["singular_segments"] = s.singular_count();
  if (!s.singular_match_mask.empty()) {
    doc["match_tol"] = s.match_tol;
    doc["singular_coverage"] = s.singular_coverage();
    doc["singular_match_mask"] = s.singular_match_mask;
  }
  return nlohmann::json::parse(doc.dump());
}

double approximation_quotient(double e_gd, double e_qaoa) {
  if (e_gd == 0.0) throw std::invalid_argument("approximation quotient is undefined for E_GD = 0");
  return (e_gd - e_qaoa) / e_gd;
}

ScalingFit power_law_fit(const std::vector<double>& xs, const std::vector<double>& ys,
                         std::optional<std::pair<std::size_t, std::size_t>> window) {
  if (xs.size() != ys.size()) throw std::invalid_argument("power_law_fit: xs and ys differ in length");
  std::size_t first, end;
  if (window) {
    std::tie(first, end) = *window;
  } else {
    end = xs.size();
    first = end >= 5 ? end - 5 : 0;
  }
  if (end > xs.size() || first >= end || end - first < 3) {
    throw std::invalid_argument("power_law_fit needs at least 3 points in the window");
  }
  const auto n = static_cast<double>(end - first);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = first; i < end; ++i) {
    if (!(ys[i] > 0.0)) throw std::invalid_argument("power_law_fit: y[" + std::to_string(i) + "] is not positive");
    if (!(xs[i] > 0.0)) throw std::invalid_argument("power_law_fit: x[" + std::to_string(i) + "] is not positive");
    const double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-300) throw std::invalid_argument("power_law_fit: x values are degenerate");
  const double slope = (n * sxy - sx * sy) / den;
  const double intercept = (sy - slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = first; i < end; ++i) {
    const double r = std::log(ys[i]) - (intercept + slope * std::log(xs[i]));
    ss += r * r;
  }
  return {std::exp(intercept), -slope, first, end, std::sqrt(ss / n)};
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty series");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double relative_spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return (*hi - *lo) / std::abs(median(v));
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("spearman: length mismatch");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j);
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(xs), ry = ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

LambdaRow lambda_point(const ControlProblem& problem, double t_f, int segments, const GdConfig& cfg, double h_tol) {
  const GdResult r = gd_optimize(problem, t_f, segments, cfg);
  LambdaRow row;
  row.t_f = t_f;
  row.hbb_median = median(r.sweep.hbb);
  const auto [lo, hi] = std::minmax_element(r.sweep.hbb.begin(), r.sweep.hbb.end());
  row.hbb_spread = *hi - *lo;
  row.J = r.sweep.cost_J;
  row.unconstrained = std::abs(row.hbb_median) <= h_tol;
  row.converged = r.converged;
  return row;
}

std::vector<LambdaRow> lambda_sweep(const ControlProblem& problem, const std::vector<double>& t_fs, int segments,
                                    const GdConfig& cfg, double h_tol, int workers) {
  if (t_fs.empty()) throw std::invalid_argument("lambda_sweep needs at least one t_f");
  return parallel_map<LambdaRow>(t_fs.size(), workers,
                                 [&](std::size_t i) { return lambda_point(problem, t_fs[i], segments, cfg, h_tol); });
}

std::size_t soft_constraint_argmin(const std::vector<double>& ts, const std::vector<double>& Js, double lambda) {
  if (ts.empty() || ts.size() != Js.size()) throw std::invalid_argument("soft_constraint_argmin: bad table");
  std::size_t best = 0;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (Js[i] + lambda * ts[i] < Js[best] + lambda * ts[best]) best = i;
  }
  return best;
}

BangLengthRow bang_length_point(const ControlProblem& problem, double t_f, int segments, const GdConfig& cfg,
                                double eps_phi) {
  const GdResult r = gd_optimize(problem, t_f, segments, cfg);
  const ProtocolStructure s = detect_structure(r.protocol, r.sweep, kDefaultEpsU, eps_phi);
  return {t_f, s.initial_bang_length, s.final_bang_length, r.converged};
}

std::vector<BangLengthRow> bang_length_sweep(const ControlProblem& problem, const std::vector<double>& t_fs,
                                             int segments, const GdConfig& cfg, double eps_phi, int workers) {
  if (t_fs.empty()) throw std::invalid_argument("bang_length_sweep needs at least one t_f");
  return parallel_map<BangLengthRow>(
      t_fs.size(), workers, [&](std::size_t i) { return bang_length_point(problem, t_fs[i], segments, cfg, eps_phi); });
}

PScalingRow pscaling_point(const ControlProblem& problem, const GridProtocol& gd_protocol, double e_gd, int p,
                           const QaoaConfig& base) {
  QaoaConfig cfg = base;
  cfg.p = p;
  cfg.t_f = gd_protocol.t_f();
  cfg.init = QaoaInitKind::Trotter;
  cfg.trotter_source = gd_protocol;
  const QaoaResult r = qaoa_optimize(problem, cfg);
  return {p, r.energy, e_gd, approximation_quotient(e_gd, r.energy), r.converged};
}

std::vector<PScalingRow> pscaling_sweep(const ControlProblem& problem, const GridProtocol& gd_protocol, double e_gd,
                                        const std::vector<int>& ps, const QaoaConfig& base, int workers) {
  if (ps.empty()) throw std::invalid_argument("pscaling_sweep needs at least one p");
  return parallel_map<PScalingRow>(
      ps.size(), workers, [&](std::size_t i) { return pscaling_point(problem, gd_protocol, e_gd, ps[i], base); });
}

}  // namespace qcontrol
