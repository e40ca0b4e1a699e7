#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qcontrol {

using cplx = std::complex<double>;

/// Amplitude vector over the 2^n computational basis states.
///
/// Basis index bit q holds qubit q (qubit 0 is the least significant bit),
/// and a 0 bit is the +1 eigenstate of sigma^z. The same type carries
/// physical states and unnormalized costates, so normalization is not
/// enforced here; `is_normalized` checks it where a caller needs it.
class StateVector {
 public:
  StateVector() = default;

  /// Zero vector on n qubits.
  explicit StateVector(int n_qubits);

  /// Throws std::invalid_argument unless amplitudes.size() == 2^n_qubits.
  StateVector(int n_qubits, std::vector<cplx> amplitudes);

  static StateVector basis(int n_qubits, std::size_t index);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amps_.size(); }

  std::span<const cplx> amplitudes() const { return amps_; }
  std::span<cplx> amplitudes() { return amps_; }

  const cplx& operator[](std::size_t i) const { return amps_[i]; }
  cplx& operator[](std::size_t i) { return amps_[i]; }

  double norm() const;
  bool is_normalized(double tol = 1e-10) const;

  StateVector& operator+=(const StateVector& other);
  StateVector& operator*=(cplx factor);

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  int n_qubits_ = 0;
  std::vector<cplx> amps_;
};

StateVector operator+(StateVector lhs, const StateVector& rhs);
StateVector operator*(cplx factor, StateVector psi);

/// <bra|ket>, conjugate-linear in bra.
cplx inner(const StateVector& bra, const StateVector& ket);
cplx inner(std::span<const cplx> bra, std::span<const cplx> ket);

/// Maximum elementwise distance; throws on dimension mismatch.
double max_abs_diff(const StateVector& a, const StateVector& b);

/// Checks 2^n_qubits against the sizes the simulator supports (1..24).
std::size_t dimension_for(int n_qubits);

}  // namespace qcontrol
