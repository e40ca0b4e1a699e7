#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace qcontrol {

struct TraceRow {
  int iter = 0;
  double J = 0.0;
  double grad_norm = 0.0;
  double step_size = 0.0;
};

/// CSV with header iter,J,grad_norm,step_size.
std::string trace_csv(const std::vector<TraceRow>& trace);

/// Smooth objective over a closed convex set, in a weighted Euclidean metric
/// <a, b>_w = weight * sum a_i b_i. `gradient` is the density g with
/// dJ = weight * <g, dx>.
struct ApgProblem {
  std::function<double(const std::vector<double>&)> value;
  std::function<double(const std::vector<double>&, std::vector<double>&)> value_and_gradient;
  std::function<void(std::vector<double>&)> project;
  double weight = 1.0;
};

struct ApgOptions {
  int max_iters = 50000;
  double step_size = 1.0;
  double stop_tol = 1e-6;
  /// Consecutive step halvings without an accepted iterate before giving up.
  int max_halvings = 60;
  /// Below this relative change in J, trial steps are judged by gradients
  /// rather than by values.
  double flat_tol = 1e-12;
  /// eta grows by this factor after a step accepted without halving, capped
  /// at step_size.
  double growth = 1.1;
};

struct ApgResult {
  std::vector<double> x;
  double value = 0.0;
  std::vector<double> gradient;
  /// ||x - P(x - g)||_inf at the returned point.
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Halving ran out with finite values: no step decreases J measurably.
  bool stalled = false;
  std::vector<TraceRow> trace;
};

/// Accelerated projected gradient with the t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2
/// momentum schedule.
///
/// A trial point z = P(y - eta g(y)) is accepted only if it satisfies the
/// quadratic upper bound at y and does not raise J above the last accepted
/// iterate. Otherwise momentum is reset (y = x) or, when momentum is already
/// off, eta is halved. Once changes in J fall below flat_tol the same two
/// tests are made on gradients (curvature along z - y, and the sign of
/// <y - z, z - x>), so accepted values are non-increasing up to rounding.
/// When halving runs out the run stops with stalled = true. Throws
/// OptimizationDiverged only when J becomes non-finite.
ApgResult accelerated_projected_gradient(const ApgProblem& problem, std::vector<double> x0, const ApgOptions& opt);

/// ||x - P(x - g)||_inf
double projected_gradient_norm(const ApgProblem& problem, const std::vector<double>& x, const std::vector<double>& g);

class OptimizationDiverged : public std::runtime_error {
 public:
  OptimizationDiverged(const std::string& what, std::vector<TraceRow> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<TraceRow>& trace() const { return trace_; }

 private:
  std::vector<TraceRow> trace_;
};

/// Euclidean projection onto {d >= 0, sum d = total} (sort-based).
void project_scaled_simplex(std::vector<double>& d, double total);

/// Clamp every entry to [lo, hi].
void project_box(std::vector<double>& x, double lo, double hi);

}  // namespace qcontrol
