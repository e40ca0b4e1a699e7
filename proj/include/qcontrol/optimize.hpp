#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qcontrol/adjoint.hpp"
#include "qcontrol/apg.hpp"
#include "qcontrol/protocol.hpp"

namespace qcontrol {

enum class GdInitKind { Constant, Random, Provided };

struct GdInit {
  GdInitKind kind = GdInitKind::Constant;
  double value = 0.5;
  std::uint64_t seed = 0;
  /// Used by Provided; length must equal M.
  std::vector<double> samples;
};

struct GdConfig {
  int max_iters = 50000;
  double step_size = 1.0;
  double stop_tol = 1e-6;
  /// Number of starts; start 0 uses `init`, later starts use random
  /// initial protocols seeded from `seed`.
  int restarts = 1;
  GdInit init;
  std::uint64_t seed = 0;
  int workers = 1;
  PropagationConfig propagation;
};

void validate(const GdConfig& cfg);

/// Smooth random protocol: piecewise-linear through 8 uniform knots.
std::vector<double> random_protocol_samples(int segments, std::uint64_t seed);

struct StartSummary {
  double J = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<TraceRow> trace;
};

struct GdResult {
  GridProtocol protocol;
  SweepResult sweep;
  std::vector<TraceRow> trace;
  bool converged = false;
  int iterations = 0;
  /// ||u - clamp(u - phi)||_inf at the returned protocol.
  double residual = 0.0;
  std::size_t best_start = 0;
  std::vector<StartSummary> starts;
};

/// Accelerated projected gradient on u in [0,1]^M with the switching
/// function density as gradient. Best of `cfg.restarts` starts.
GdResult gd_optimize(const ControlProblem& problem, double t_f, int segments, const GdConfig& cfg);
GdResult gd_optimize(const ProblemInstance& inst, double t_f, int segments, const GdConfig& cfg);

enum class QaoaInitKind { Equal, Trotter, Provided };

struct QaoaConfig {
  int p = 1;
  double t_f = 1.0;
  QaoaInitKind init = QaoaInitKind::Equal;
  /// Grid protocol trotterized by the Trotter init.
  std::optional<GridProtocol> trotter_source;
  /// Starting point for the Provided init; padded with zero-length pairs up to p.
  std::optional<BangSequence> provided;
  int max_iters = 50000;
  double stop_tol = 1e-6;
  double step_size = 1.0;
  PropagationConfig propagation;
};

void validate(const QaoaConfig& cfg);

struct QaoaResult {
  BangSequence bangs;
  double energy = 0.0;
  std::vector<TraceRow> trace;
  bool converged = false;
  int iterations = 0;
  /// ||d - P(d - g)||_inf with g_j = dJ/dd_j.
  double kkt_residual = 0.0;
};

/// Optimizes the 2p durations on {d >= 0, sum d = t_f}. dJ/dd_j equals minus
/// the control Hamiltonian on bang j, i.e. -Phi_C on C bangs and -Phi_B on
/// B bangs.
QaoaResult qaoa_optimize(const ControlProblem& problem, const QaoaConfig& cfg);
QaoaResult qaoa_optimize(const ProblemInstance& inst, const QaoaConfig& cfg);

/// Per-bang gradient dJ/dd_j of a bang sequence.
std::vector<double> bang_gradient(const ControlProblem& problem, const BangSequence& b, double* energy = nullptr,
                                  const PropagationConfig& cfg = {});

/// Inserts zero-length C/B pairs in the middle of `b` until it has p pairs.
BangSequence pad_bangs(const BangSequence& b, int p);

template <class R>
struct MultiStartResult {
  std::size_t best_index = 0;
  std::vector<R> runs;
  const R& best() const { return runs[best_index]; }
};

/// Seed for start i (i >= 1) derived from the base seed.
std::uint64_t start_seed(std::uint64_t seed, std::size_t index);

/// Runs `run(index, start_seed(seed, index))` for every start, on up to
/// `workers` threads. The argmin of `energy` wins; ties go to the lower index.
template <class R>
MultiStartResult<R> multi_start(const std::function<R(std::size_t, std::uint64_t)>& run,
                                const std::function<double(const R&)>& energy, int n_starts, std::uint64_t seed,
                                int workers = 1);

}  // namespace qcontrol

#include "qcontrol/multi_start_impl.hpp"
