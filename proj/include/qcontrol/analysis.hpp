#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "qcontrol/adjoint.hpp"
#include "qcontrol/optimize.hpp"
#include "qcontrol/protocol.hpp"

namespace qcontrol {

enum class SegmentKind { Bang0, Bang1, Singular };

const char* to_string(SegmentKind kind);

struct StructureBlock {
  SegmentKind kind = SegmentKind::Bang0;
  double t_start = 0.0;
  double t_end = 0.0;
  int first_segment = 0;
  /// One past the last segment.
  int end_segment = 0;
};

struct ProtocolStructure {
  double t_f = 0.0;
  int segments = 0;
  double initial_bang_length = 0.0;
  double final_bang_length = 0.0;
  /// Blocks strictly between the initial and final bangs.
  std::vector<StructureBlock> interior;
  /// Per-segment class; a flagged segment gets the class its u alone suggests.
  std::vector<SegmentKind> classes;
  /// Segments that satisfy none of the three Pontryagin cases.
  std::vector<int> flagged;
  /// Singular segments where |u - u*| <= match_tol; empty unless computed.
  std::vector<bool> singular_match_mask;
  double match_tol = 0.02;

  /// All blocks in time order: initial bang (if any), interior, final bang (if any).
  std::vector<StructureBlock> blocks() const;
  int singular_count() const;
  /// Longest contiguous run of matched singular segments over singular_count().
  double singular_coverage() const;
};

inline constexpr double kDefaultEpsU = 1e-3;

/// Classifies each segment:
///   Bang0     u <= eps_u and phi >= -eps_phi
///   Bang1     u >= 1 - eps_u and phi <= eps_phi
///   Singular  eps_u < u < 1 - eps_u and |phi| <= eps_phi
/// Anything else is flagged. With `problem` set, also fills the singular
/// match mask from singular_u_star at the segment's bounding nodes.
ProtocolStructure detect_structure(const GridProtocol& g, const SweepResult& sweep, double eps_u, double eps_phi,
                                   const ControlProblem* problem = nullptr, double match_tol = 0.02);

/// Rebuilds a grid protocol from a structure (bangs at 0/1, singular blocks
/// keep the samples of `g`).
GridProtocol resynthesize(const ProtocolStructure& s, const GridProtocol& g);

nlohmann::json to_json(const ProtocolStructure& s);
inline constexpr const char* kStructureSchema = "qcontrol.structure/1";

/// Root of u Phi_[[B,C],B] + (1 - u) Phi_[[B,C],C] = 0,
///   u* = Phi_[[B,C],C] / (Phi_[[B,C],C] - Phi_[[B,C],B]).
/// nullopt when the denominator is below 1e-12 in magnitude.
std::optional<double> singular_u_star(const OperatorHandle& B, const OperatorHandle& C, const StateVector& x,
                                      const StateVector& k);

/// (E_GD - E_QAOA) / E_GD. With negative energies this is positive when
/// QAOA lies above the GD optimum. Throws if E_GD == 0.
double approximation_quotient(double e_gd, double e_qaoa);

struct ScalingFit {
  double prefactor = 0.0;
  double exponent = 0.0;
  /// Index range [first, end) of the fitted points.
  std::size_t first = 0;
  std::size_t end = 0;
  /// RMS residual in log space.
  double residual = 0.0;
};

/// Least squares fit of log y = log C - nu log x over the window (default: the
/// last 5 points). Throws on fewer than 3 points or nonpositive x, y.
ScalingFit power_law_fit(const std::vector<double>& xs, const std::vector<double>& ys,
                         std::optional<std::pair<std::size_t, std::size_t>> window = std::nullopt);

double median(std::vector<double> v);
/// (max - min) / |median| of the control Hamiltonian series.
double relative_spread(const std::vector<double>& v);

/// Spearman rank correlation (average ranks for ties). NaN if undefined.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

struct LambdaRow {
  double t_f = 0.0;
  double hbb_median = 0.0;
  double hbb_spread = 0.0;
  double J = 0.0;
  bool unconstrained = false;
  bool converged = false;
};

/// One gd run per t_f; ℍ reported as the median over segments.
/// `unconstrained` is set when |ℍ| <= h_tol.
std::vector<LambdaRow> lambda_sweep(const ControlProblem& problem, const std::vector<double>& t_fs, int segments,
                                    const GdConfig& cfg, double h_tol = 1e-3, int workers = 1);
LambdaRow lambda_point(const ControlProblem& problem, double t_f, int segments, const GdConfig& cfg,
                       double h_tol = 1e-3);

/// Index of the t minimizing J(t) + lambda t over a scanned table.
std::size_t soft_constraint_argmin(const std::vector<double>& ts, const std::vector<double>& Js, double lambda);

struct BangLengthRow {
  double t_f = 0.0;
  double initial_bang = 0.0;
  double final_bang = 0.0;
  bool converged = false;
};

BangLengthRow bang_length_point(const ControlProblem& problem, double t_f, int segments, const GdConfig& cfg,
                                double eps_phi);
std::vector<BangLengthRow> bang_length_sweep(const ControlProblem& problem, const std::vector<double>& t_fs,
                                             int segments, const GdConfig& cfg, double eps_phi, int workers = 1);

struct PScalingRow {
  int p = 0;
  double e_qaoa = 0.0;
  double e_gd = 0.0;
  double quotient = 0.0;
  bool converged = false;
};

/// QAOA at each p, initialized from trotterize(gd_protocol, p), compared
/// against the gd energy.
PScalingRow pscaling_point(const ControlProblem& problem, const GridProtocol& gd_protocol, double e_gd, int p,
                           const QaoaConfig& base);
std::vector<PScalingRow> pscaling_sweep(const ControlProblem& problem, const GridProtocol& gd_protocol, double e_gd,
                                        const std::vector<int>& ps, const QaoaConfig& base, int workers = 1);

}  // namespace qcontrol
