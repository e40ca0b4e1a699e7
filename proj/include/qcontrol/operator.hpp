#pragma once

#include <Eigen/Dense>

#include <span>
#include <variant>
#include <vector>

#include "qcontrol/state.hpp"

namespace qcontrol {

enum class OperatorKind { Diagonal, TransverseField, Dense };

const char* to_string(OperatorKind kind);

/// A Hermitian operator on n qubits in one of three structured forms.
///
/// - Diagonal: real energies per basis state.
/// - TransverseField: sum_q h_q sigma^x_q (the mixer uses h_q = -1).
/// - Dense: full Hermitian matrix, checked elementwise to 1e-12.
class OperatorHandle {
 public:
  static OperatorHandle diagonal(int n_qubits, std::vector<double> energies);
  static OperatorHandle transverse_field(std::vector<double> coefficients);
  static OperatorHandle dense(int n_qubits, Eigen::MatrixXcd matrix);

  OperatorKind kind() const;
  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return std::size_t{1} << n_qubits_; }

  /// Payload accessors; each throws std::logic_error on the wrong kind.
  const std::vector<double>& energies() const;
  const std::vector<double>& field_coefficients() const;
  const Eigen::MatrixXcd& matrix() const;

  /// out = op * in. Spans must have length dim() and must not alias.
  void apply_into(std::span<const cplx> in, std::span<cplx> out) const;

  /// Guaranteed enclosure [lower, upper] of the spectrum.
  double spectrum_lower() const { return lower_; }
  double spectrum_upper() const { return upper_; }

  /// Dense copy of the operator, for oracles and the eigendecomposition path.
  Eigen::MatrixXcd to_dense() const;

 private:
  struct Diag {
    std::vector<double> energies;
  };
  struct Field {
    std::vector<double> coefficients;
  };
  struct Full {
    Eigen::MatrixXcd matrix;
  };

  OperatorHandle(int n_qubits, std::variant<Diag, Field, Full> payload);

  int n_qubits_ = 0;
  std::variant<Diag, Field, Full> payload_;
  double lower_ = 0.0;
  double upper_ = 0.0;
};

StateVector apply(const OperatorHandle& op, const StateVector& psi);

/// <psi|op|psi>. Throws std::runtime_error when the imaginary part exceeds
/// `imag_tol`, which indicates a non-Hermitian payload.
double expectation(const OperatorHandle& op, const StateVector& psi, double imag_tol = 1e-12);

/// <bra|op|ket>.
cplx matrix_element(const StateVector& bra, const OperatorHandle& op, const StateVector& ket);

}  // namespace qcontrol
