#include "qcontrol/apg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace qcontrol {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::string out = "iter,J,grad_norm,step_size\n";
  for (const auto& r : trace) {
    out += std::to_string(r.iter) + "," + fmt(r.J) + "," + fmt(r.grad_norm) + "," + fmt(r.step_size) + "\n";
  }
  return out;
}

void project_box(std::vector<double>& x, double lo, double hi) {
  for (auto& v : x) v = std::clamp(v, lo, hi);
}

void project_scaled_simplex(std::vector<double>& d, double total) {
  if (d.empty()) return;
  std::vector<double> s = d;
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cum += s[i];
    const double candidate = (cum - total) / static_cast<double>(i + 1);
    if (s[i] - candidate > 0.0) theta = candidate;
  }
  double sum = 0.0;
  for (auto& v : d) {
    v = std::max(0.0, v - theta);
    sum += v;
  }
  // Put the rounding residue on the largest entry so the sum is exact to ~1 ulp.
  auto largest = std::max_element(d.begin(), d.end());
  *largest = std::max(0.0, *largest + (total - sum));
}

double projected_gradient_norm(const ApgProblem& problem, const std::vector<double>& x, const std::vector<double>& g) {
  std::vector<double> p(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) p[i] = x[i] - g[i];
  problem.project(p);
  double r = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) r = std::max(r, std::abs(x[i] - p[i]));
  return r;
}

ApgResult accelerated_projected_gradient(const ApgProblem& problem, std::vector<double> x0, const ApgOptions& opt) {
  if (!(opt.step_size > 0.0)) throw std::invalid_argument("step_size must be > 0");
  if (!(opt.stop_tol > 0.0)) throw std::invalid_argument("stop_tol must be > 0");
  const std::size_t n = x0.size();
  const double w = problem.weight;

  ApgResult res;
  std::vector<double> x = std::move(x0);
  problem.project(x);
  std::vector<double> gy(n), gz(n), z(n);
  double fx = problem.value_and_gradient(x, gy);
  if (!std::isfinite(fx)) throw OptimizationDiverged("objective is not finite at the initial point", {});
  std::vector<double> y = x;
  double fy = fx;
  bool y_is_x = true;
  bool need_eval = false;
  double t = 1.0;
  double eta = opt.step_size;
  int halvings = 0;
  double r = projected_gradient_norm(problem, y, gy);
  res.trace.push_back({0, fx, r, eta});

  int iter = 0;
  for (; iter < opt.max_iters; ++iter) {
    if (need_eval) {
      fy = problem.value_and_gradient(y, gy);
      if (!std::isfinite(fy)) throw OptimizationDiverged("objective became non-finite", res.trace);
      need_eval = false;
      r = projected_gradient_norm(problem, y, gy);
    }
    if (r <= opt.stop_tol) {
      if (y_is_x) {
        res.converged = true;
        break;
      }
      y = x;
      y_is_x = true;
      t = 1.0;
      need_eval = true;
      continue;
    }

    for (std::size_t i = 0; i < n; ++i) z[i] = y[i] - eta * gy[i];
    problem.project(z);
    double fz = problem.value(z);
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = z[i] - y[i];
      lin += gy[i] * d;
      quad += d * d;
    }
    if (quad == 0.0) {
      res.stalled = true;
      break;
    }
    const double scale = 1.0 + std::abs(fy);
    bool fits = false, ascent = false, have_gz = false;
    if (!std::isfinite(fz)) {
      fits = false;
    } else if (std::abs(fz - fy) > opt.flat_tol * scale) {
      fits = fz <= fy + w * lin + w * quad / (2.0 * eta) + 64.0 * kEps * scale;
      ascent = fz > fx;
    } else {
      // Value differences are down at rounding level, so compare gradients
      // instead: local curvature along z - y against 1/eta, and the gradient
      // restart test for momentum.
      fz = problem.value_and_gradient(z, gz);
      have_gz = true;
      double curv = 0.0, dir = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        curv += (gz[i] - gy[i]) * (z[i] - y[i]);
        dir += (y[i] - z[i]) * (z[i] - x[i]);
      }
      fits = std::isfinite(fz) && curv <= quad / eta;
      ascent = dir > 0.0;
    }
    if (!fits || (y_is_x && ascent)) {
      eta *= 0.5;
      if (++halvings > opt.max_halvings) {
        if (!std::isfinite(fz)) {
          throw OptimizationDiverged("step size halved " + std::to_string(halvings) + " times without a finite value",
                                     res.trace);
        }
        res.stalled = true;
        break;
      }
      continue;
    }
    if (ascent) {
      // Momentum overshoot: restart from the accepted iterate.
      y = x;
      y_is_x = true;
      t = 1.0;
      need_eval = true;
      continue;
    }
    if (halvings == 0) eta = std::min(opt.step_size, eta * opt.growth);

    halvings = 0;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    for (std::size_t i = 0; i < n; ++i) y[i] = z[i] + beta * (z[i] - x[i]);
    problem.project(y);
    x = z;
    fx = fz;
    t = t_next;
    y_is_x = beta == 0.0;
    need_eval = true;
    if (y_is_x && have_gz) {
      fy = fz;
      gy = gz;
      r = projected_gradient_norm(problem, y, gy);
      need_eval = false;
    }
    res.trace.push_back({iter + 1, fx, r, eta});
  }

  res.iterations = iter;
  if (!y_is_x || need_eval) {
    res.value = problem.value_and_gradient(x, res.gradient);
    res.residual = projected_gradient_norm(problem, x, res.gradient);
    res.converged = res.converged || res.residual <= opt.stop_tol;
  } else {
    res.value = fx;
    res.gradient = gy;
    res.residual = r;
  }
  res.x = std::move(x);
  return res;
}

}  // namespace qcontrol
