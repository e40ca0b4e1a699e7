#include "qcontrol/operator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qcontrol {

const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::Diagonal: return "Diagonal";
    case OperatorKind::TransverseField: return "TransverseField";
    case OperatorKind::Dense: return "Dense";
  }
  return "?";
}

OperatorHandle::OperatorHandle(int n_qubits, std::variant<Diag, Field, Full> payload)
    : n_qubits_(n_qubits), payload_(std::move(payload)) {
  if (const auto* d = std::get_if<Diag>(&payload_)) {
    const auto [lo, hi] = std::minmax_element(d->energies.begin(), d->energies.end());
    lower_ = *lo;
    upper_ = *hi;
  } else if (const auto* f = std::get_if<Field>(&payload_)) {
    double s = 0.0;
    for (double h : f->coefficients) s += std::abs(h);
    lower_ = -s;
    upper_ = s;
  } else {
    // Gershgorin discs.
    const auto& m = std::get<Full>(payload_).matrix;
    lower_ = std::numeric_limits<double>::infinity();
    upper_ = -lower_;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      double radius = 0.0;
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c != r) radius += std::abs(m(r, c));
      }
      lower_ = std::min(lower_, m(r, r).real() - radius);
      upper_ = std::max(upper_, m(r, r).real() + radius);
    }
  }
}

OperatorHandle OperatorHandle::diagonal(int n_qubits, std::vector<double> energies) {
  if (energies.size() != dimension_for(n_qubits)) {
    throw std::invalid_argument("diagonal payload length " + std::to_string(energies.size()) +
                                " does not match 2^" + std::to_string(n_qubits));
  }
  for (double e : energies) {
    if (!std::isfinite(e)) throw std::invalid_argument("diagonal payload must be finite");
  }
  return OperatorHandle(n_qubits, Diag{std::move(energies)});
}

OperatorHandle OperatorHandle::transverse_field(std::vector<double> coefficients) {
  const int n = static_cast<int>(coefficients.size());
  dimension_for(n);
  for (double h : coefficients) {
    if (!std::isfinite(h)) throw std::invalid_argument("field coefficients must be finite");
  }
  return OperatorHandle(n, Field{std::move(coefficients)});
}

OperatorHandle OperatorHandle::dense(int n_qubits, Eigen::MatrixXcd matrix) {
  const auto d = static_cast<Eigen::Index>(dimension_for(n_qubits));
  if (matrix.rows() != d || matrix.cols() != d) {
    throw std::invalid_argument("dense payload must be 2^n x 2^n");
  }
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = r; c < d; ++c) {
      if (std::abs(matrix(r, c) - std::conj(matrix(c, r))) > 1e-12) {
        throw std::invalid_argument("dense payload is not Hermitian at (" + std::to_string(r) +
                                    ", " + std::to_string(c) + ")");
      }
    }
  }
  return OperatorHandle(n_qubits, Full{std::move(matrix)});
}

OperatorKind OperatorHandle::kind() const {
  switch (payload_.index()) {
    case 0: return OperatorKind::Diagonal;
    case 1: return OperatorKind::TransverseField;
    default: return OperatorKind::Dense;
  }
}

const std::vector<double>& OperatorHandle::energies() const {
  if (const auto* d = std::get_if<Diag>(&payload_)) return d->energies;
  throw std::logic_error("operator is not Diagonal");
}

const std::vector<double>& OperatorHandle::field_coefficients() const {
  if (const auto* f = std::get_if<Field>(&payload_)) return f->coefficients;
  throw std::logic_error("operator is not TransverseField");
}

const Eigen::MatrixXcd& OperatorHandle::matrix() const {
  if (const auto* m = std::get_if<Full>(&payload_)) return m->matrix;
  throw std::logic_error("operator is not Dense");
}

void OperatorHandle::apply_into(std::span<const cplx> in, std::span<cplx> out) const {
  const std::size_t d = dim();
  if (in.size() != d || out.size() != d) {
    throw std::invalid_argument("apply: dimension mismatch (operator " + std::to_string(d) +
                                ", state " + std::to_string(in.size()) + ")");
  }
  if (const auto* diag = std::get_if<Diag>(&payload_)) {
    const double* e = diag->energies.data();
    for (std::size_t z = 0; z < d; ++z) out[z] = e[z] * in[z];
  } else if (const auto* field = std::get_if<Field>(&payload_)) {
    std::fill(out.begin(), out.end(), cplx{});
    for (int q = 0; q < n_qubits_; ++q) {
      const double h = field->coefficients[static_cast<std::size_t>(q)];
      if (h == 0.0) continue;
      const std::size_t bit = std::size_t{1} << q;
      for (std::size_t z = 0; z < d; ++z) out[z] += h * in[z ^ bit];
    }
  } else {
    const auto& m = std::get<Full>(payload_).matrix;
    Eigen::Map<const Eigen::VectorXcd> x(in.data(), static_cast<Eigen::Index>(d));
    Eigen::Map<Eigen::VectorXcd> y(out.data(), static_cast<Eigen::Index>(d));
    y.noalias() = m * x;
  }
}

Eigen::MatrixXcd OperatorHandle::to_dense() const {
  const auto d = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  if (const auto* diag = std::get_if<Diag>(&payload_)) {
    for (Eigen::Index z = 0; z < d; ++z) m(z, z) = diag->energies[static_cast<std::size_t>(z)];
  } else if (const auto* field = std::get_if<Field>(&payload_)) {
    for (int q = 0; q < n_qubits_; ++q) {
      const auto bit = Eigen::Index{1} << q;
      for (Eigen::Index z = 0; z < d; ++z) m(z ^ bit, z) += field->coefficients[static_cast<std::size_t>(q)];
    }
  } else {
    m = std::get<Full>(payload_).matrix;
  }
  return m;
}

StateVector apply(const OperatorHandle& op, const StateVector& psi) {
  if (psi.dim() != op.dim()) {
    throw std::invalid_argument("apply: operator on " + std::to_string(op.n_qubits()) +
                                " qubits, state on " + std::to_string(psi.n_qubits()));
  }
  StateVector out(psi.n_qubits());
  op.apply_into(psi.amplitudes(), out.amplitudes());
  return out;
}

cplx matrix_element(const StateVector& bra, const OperatorHandle& op, const StateVector& ket) {
  return inner(bra, apply(op, ket));
}

double expectation(const OperatorHandle& op, const StateVector& psi, double imag_tol) {
  const cplx v = matrix_element(psi, op, psi);
  if (std::abs(v.imag()) > imag_tol) {
    throw std::runtime_error("expectation has imaginary part " + std::to_string(v.imag()) +
                             "; operator payload is not Hermitian");
  }
  return v.real();
}

}  // namespace qcontrol
