#include "qcontrol/state.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qcontrol {

std::size_t dimension_for(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 24) {
    throw std::invalid_argument("n_qubits must be in [1, 24], got " + std::to_string(n_qubits));
  }
  return std::size_t{1} << n_qubits;
}

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits), amps_(dimension_for(n_qubits)) {}

StateVector::StateVector(int n_qubits, std::vector<cplx> amplitudes)
    : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
  if (amps_.size() != dimension_for(n_qubits)) {
    throw std::invalid_argument("amplitude vector length " + std::to_string(amps_.size()) +
                                " does not match 2^" + std::to_string(n_qubits));
  }
}

StateVector StateVector::basis(int n_qubits, std::size_t index) {
  StateVector psi(n_qubits);
  if (index >= psi.dim()) throw std::out_of_range("basis index out of range");
  psi.amps_[index] = 1.0;
  return psi;
}

double StateVector::norm() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return std::sqrt(s);
}

bool StateVector::is_normalized(double tol) const { return std::abs(norm() - 1.0) <= tol; }

StateVector& StateVector::operator+=(const StateVector& other) {
  if (other.dim() != dim()) throw std::invalid_argument("state dimension mismatch in +=");
  for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] += other.amps_[i];
  return *this;
}

StateVector& StateVector::operator*=(cplx factor) {
  for (auto& a : amps_) a *= factor;
  return *this;
}

StateVector operator+(StateVector lhs, const StateVector& rhs) { return lhs += rhs; }

StateVector operator*(cplx factor, StateVector psi) { return psi *= factor; }

cplx inner(std::span<const cplx> bra, std::span<const cplx> ket) {
  if (bra.size() != ket.size()) {
    throw std::invalid_argument("inner: dimension mismatch (" + std::to_string(bra.size()) +
                                " vs " + std::to_string(ket.size()) + ")");
  }
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < bra.size(); ++i) {
    const double a = bra[i].real(), b = bra[i].imag();
    const double c = ket[i].real(), d = ket[i].imag();
    re += a * c + b * d;
    im += a * d - b * c;
  }
  return {re, im};
}

cplx inner(const StateVector& bra, const StateVector& ket) {
  return inner(bra.amplitudes(), ket.amplitudes());
}

double max_abs_diff(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("max_abs_diff: dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace qcontrol
