#pragma once

#include <span>
#include <vector>

#include "qcontrol/operator.hpp"
#include "qcontrol/state.hpp"

namespace qcontrol {

enum class PropagationMethod {
  /// Truncated Taylor series of the shifted generator with scaling; runs to
  /// double precision for any operator kinds.
  Taylor,
  /// exp(-iuB dt/2) exp(-i(1-u)C dt) exp(-iuB dt/2) per substep. Requires a
  /// Diagonal C and a TransverseField B.
  StrangSplit,
  /// Eigendecomposition of the dense generator.
  DenseExpm,
};

const char* to_string(PropagationMethod method);

struct PropagationConfig {
  int substeps_per_segment = 1;
  PropagationMethod method = PropagationMethod::Taylor;
  /// Target local error for StrangSplit.
  double tolerance = 1e-8;
  /// StrangSplit only: raise the substep count until
  /// (dt/substeps)^2 * ||[B,C]||_est <= tolerance.
  bool adaptive_substeps = true;
};

/// Throws std::invalid_argument for a malformed config or for StrangSplit on
/// operator kinds it cannot factor.
void validate(const PropagationConfig& cfg, const OperatorHandle& B, const OperatorHandle& C);

/// Upper bound on ||[B, C]|| used by the Strang substep rule.
double commutator_norm_bound(const OperatorHandle& B, const OperatorHandle& C);

/// Repeated in-place evolution under H(u) = u B + (1 - u) C.
///
/// Keeps scratch buffers between calls. Holds references to B and C; they
/// must outlive the propagator.
class Propagator {
 public:
  Propagator(const OperatorHandle& B, const OperatorHandle& C, PropagationConfig cfg = {});

  /// psi <- exp(-i H(u) dt) psi. Negative dt runs the inverse evolution.
  void evolve(std::span<cplx> psi, double u, double dt);

  /// out = H(u) psi.
  void apply_generator(std::span<const cplx> psi, double u, std::span<cplx> out);

  int strang_substeps(double dt) const;

  /// True for a Diagonal C with a TransverseField B.
  bool structured_pair() const { return fast_pair_; }

  const OperatorHandle& mixer() const { return *B_; }
  const OperatorHandle& problem() const { return *C_; }
  const PropagationConfig& config() const { return cfg_; }

 private:
  void diagonal_phase(std::span<cplx> psi, double weight_dt);
  void field_rotation(std::span<cplx> psi, double weight_dt);
  void taylor(std::span<cplx> psi, double u, double dt);
  void strang(std::span<cplx> psi, double u, double dt);
  void dense_expm(std::span<cplx> psi, double u, double dt);

  const OperatorHandle* B_;
  const OperatorHandle* C_;
  PropagationConfig cfg_;
  bool fast_pair_;
  double b_center_, b_half_, c_center_, c_half_;
  std::vector<cplx> term_, next_, scratch_;
};

/// exp(-i (uB + (1-u)C) dt) psi with u in [0, 1] and dt > 0.
StateVector evolve_segment(const StateVector& psi, const OperatorHandle& B, const OperatorHandle& C,
                           double u, double dt, const PropagationConfig& cfg = {});

}  // namespace qcontrol
