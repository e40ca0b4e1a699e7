#pragma once

#include <string>
#include <vector>

#include "qcontrol/instance.hpp"
#include "qcontrol/operator.hpp"
#include "qcontrol/propagation.hpp"
#include "qcontrol/protocol.hpp"
#include "qcontrol/state.hpp"

namespace qcontrol {

/// Mixer B, problem C and the initial state (ground state of B).
struct ControlProblem {
  OperatorHandle mixer;
  OperatorHandle problem;
  StateVector initial;

  static ControlProblem from_instance(const ProblemInstance& inst);
};

/// Piecewise-constant schedule: control u[j] held for duration[j].
struct Schedule {
  std::vector<double> u;
  std::vector<double> duration;

  static Schedule from_grid(const GridProtocol& g);
  static Schedule from_bangs(const BangSequence& b);
};

/// Phi_X = i<k|X|x> + c.c. evaluated at schedule nodes (segment boundaries).
struct NodeTerms {
  std::vector<double> phi_b;
  std::vector<double> phi_c;
  /// Phi of i[B, C]; this is dPhi/dt and does not depend on u.
  std::vector<double> phi_comm;
  std::vector<cplx> overlap_kx;
};

/// Forward/backward sweeps over a schedule with a reusable propagator.
///
/// Holds a reference to the problem; it must outlive the engine.
class AdjointEngine {
 public:
  AdjointEngine(const ControlProblem& problem, PropagationConfig cfg = {});

  /// J = <x(t_f)|C|x(t_f)>. Fills `nodes` with x at every boundary if non-null.
  double forward(const Schedule& s, std::vector<StateVector>* nodes = nullptr);

  /// Runs |k(t_f)> = C|x(t_f)> backwards through the schedule and evaluates
  /// node terms against the stored forward nodes. Fills `k_nodes` if non-null.
  NodeTerms backward(const Schedule& s, const std::vector<StateVector>& x_nodes,
                     std::vector<StateVector>* k_nodes = nullptr);

  /// Forward + backward, returning J and the segment-averaged switching
  /// function density phi (dJ/du_j = duration_j * phi_j).
  double cost_and_gradient(const Schedule& s, std::vector<double>& phi);

  const ControlProblem& problem() const { return *problem_; }
  Propagator& propagator() { return prop_; }

 private:
  const ControlProblem* problem_;
  Propagator prop_;
  std::vector<StateVector> x_nodes_;
  StateVector k_, bx_, cx_, bk_, ck_;
};

/// Segment averages of Phi_B, Phi_C and Phi over segment j, from the node
/// values and the corrected trapezoid rule
///   avg f = (f_L + f_R)/2 - dt/12 (f'_R - f'_L),
/// with Phi_C' = u Phi_[iB,C] and Phi_B' = -(1 - u) Phi_[iB,C]. The result is
/// the exact segment integral up to O(dt^4).
struct SegmentPhi {
  double phi_b;
  double phi_c;
  double phi() const { return phi_c - phi_b; }
};
SegmentPhi segment_average(const NodeTerms& nodes, std::size_t j, double u, double dt);

struct ForwardResult {
  std::vector<StateVector> x;
  double cost = 0.0;
};

struct SweepResult {
  double cost_J = 0.0;
  std::vector<StateVector> x_trajectory;
  std::vector<StateVector> k_trajectory;
  /// Per segment (length M): segment averages.
  std::vector<double> phi;
  std::vector<double> phi_b;
  std::vector<double> phi_c;
  std::vector<double> hbb;
  /// Per node (length M + 1).
  std::vector<double> node_phi;
  std::vector<double> node_phi_b;
  std::vector<double> node_phi_c;
  std::vector<double> node_phi_comm;
  std::vector<cplx> overlap_kx;
};

ForwardResult forward_sweep(const ControlProblem& problem, const GridProtocol& g, const PropagationConfig& cfg = {});

/// k at every node, k[M] = C x_final.
std::vector<StateVector> backward_sweep(const ControlProblem& problem, const GridProtocol& g,
                                        const StateVector& x_final, const PropagationConfig& cfg = {});

SweepResult phi_series(const ControlProblem& problem, const GridProtocol& g, const PropagationConfig& cfg = {});

enum class CommutatorTerm {
  /// i[B, C]: the Hermitian form whose Phi is dPhi/dt (vanishes on singular arcs).
  BC,
  /// [[B, C], B]
  BCB,
  /// [[B, C], C]
  BCC,
};

/// Phi_X for a nested commutator X, built by composing operator applications.
double nested_commutator_phi(const OperatorHandle& B, const OperatorHandle& C, const StateVector& x,
                             const StateVector& k, CommutatorTerm which);

/// Control Hamiltonian per segment, u phi_B + (1 - u) phi_C.
std::vector<double> control_hamiltonian_series(const SweepResult& sweep, const GridProtocol& g);

/// CSV with header segment_index,t_mid,u,phi,phi_B,phi_C,hbb,re_overlap_kx,im_overlap_kx.
std::string sweep_csv(const SweepResult& sweep, const GridProtocol& g);

inline constexpr const char* kSweepCsvHeader =
    "segment_index,t_mid,u,phi,phi_B,phi_C,hbb,re_overlap_kx,im_overlap_kx";

}  // namespace qcontrol
