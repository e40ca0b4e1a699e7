#include "qcontrol/propagation.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qcontrol {

namespace {

// Scaling threshold for the Taylor series: each substep has ||h (H - mu)|| <= 2.
constexpr double kTaylorTheta = 2.0;
constexpr int kTaylorMaxTerms = 60;
constexpr double kTaylorRelTol = 1e-16;

double half_width(const OperatorHandle& op) { return 0.5 * (op.spectrum_upper() - op.spectrum_lower()); }
double center(const OperatorHandle& op) { return 0.5 * (op.spectrum_upper() + op.spectrum_lower()); }

}  // namespace

const char* to_string(PropagationMethod method) {
  switch (method) {
    case PropagationMethod::Taylor: return "taylor";
    case PropagationMethod::StrangSplit: return "strang";
    case PropagationMethod::DenseExpm: return "dense-expm";
  }
  return "?";
}

double commutator_norm_bound(const OperatorHandle& B, const OperatorHandle& C) {
  // [B, C] = [B - b, C - c] for scalar shifts.
  return 2.0 * half_width(B) * half_width(C);
}

void validate(const PropagationConfig& cfg, const OperatorHandle& B, const OperatorHandle& C) {
  if (cfg.substeps_per_segment < 1) throw std::invalid_argument("substeps_per_segment must be >= 1");
  if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("propagation tolerance must be > 0");
  if (B.n_qubits() != C.n_qubits()) {
    throw std::invalid_argument("B and C act on different numbers of qubits");
  }
  if (cfg.method == PropagationMethod::StrangSplit &&
      (C.kind() != OperatorKind::Diagonal || B.kind() != OperatorKind::TransverseField)) {
    throw std::invalid_argument(std::string("StrangSplit needs Diagonal C and TransverseField B, got C=") +
                                to_string(C.kind()) + ", B=" + to_string(B.kind()));
  }
}

Propagator::Propagator(const OperatorHandle& B, const OperatorHandle& C, PropagationConfig cfg)
    : B_(&B), C_(&C), cfg_(cfg) {
  validate(cfg_, B, C);
  fast_pair_ = C.kind() == OperatorKind::Diagonal && B.kind() == OperatorKind::TransverseField;
  b_center_ = center(B);
  b_half_ = half_width(B);
  c_center_ = center(C);
  c_half_ = half_width(C);
  term_.resize(B.dim());
  next_.resize(B.dim());
  scratch_.resize(B.dim());
}

int Propagator::strang_substeps(double dt) const {
  int n = cfg_.substeps_per_segment;
  if (cfg_.adaptive_substeps) {
    const double need = std::abs(dt) * std::sqrt(commutator_norm_bound(*B_, *C_) / cfg_.tolerance);
    n = std::max(n, static_cast<int>(std::ceil(need)));
  }
  return n;
}

void Propagator::apply_generator(std::span<const cplx> psi, double u, std::span<cplx> out) {
  if (fast_pair_) {
    const auto& c = C_->energies();
    const auto& h = B_->field_coefficients();
    const std::size_t d = psi.size();
    const double wc = 1.0 - u;
    for (std::size_t z = 0; z < d; ++z) out[z] = (wc * c[z]) * psi[z];
    for (int q = 0; q < B_->n_qubits(); ++q) {
      const double coef = u * h[static_cast<std::size_t>(q)];
      if (coef == 0.0) continue;
      const std::size_t bit = std::size_t{1} << q;
      // Blocked so the inner loops are contiguous and vectorize.
      for (std::size_t base = 0; base < d; base += 2 * bit) {
        cplx* lo = out.data() + base;
        cplx* hi = lo + bit;
        const cplx* plo = psi.data() + base;
        const cplx* phi = plo + bit;
        for (std::size_t i = 0; i < bit; ++i) {
          lo[i] += coef * phi[i];
          hi[i] += coef * plo[i];
        }
      }
    }
    return;
  }
  B_->apply_into(psi, out);
  C_->apply_into(psi, scratch_);
  for (std::size_t z = 0; z < psi.size(); ++z) out[z] = u * out[z] + (1.0 - u) * scratch_[z];
}

void Propagator::diagonal_phase(std::span<cplx> psi, double weight_dt) {
  const auto& c = C_->energies();
  for (std::size_t z = 0; z < psi.size(); ++z) {
    const double a = -c[z] * weight_dt;
    psi[z] *= cplx(std::cos(a), std::sin(a));
  }
}

void Propagator::field_rotation(std::span<cplx> psi, double weight_dt) {
  // exp(-i t h sigma^x) = cos(t h) - i sin(t h) sigma^x, one qubit at a time.
  const auto& h = B_->field_coefficients();
  const std::size_t d = psi.size();
  for (int q = 0; q < B_->n_qubits(); ++q) {
    const double a = h[static_cast<std::size_t>(q)] * weight_dt;
    if (a == 0.0) continue;
    const double cs = std::cos(a);
    const cplx ms(0.0, -std::sin(a));
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t z = 0; z < d; ++z) {
      if (z & bit) continue;
      const cplx lo = psi[z];
      const cplx hi = psi[z | bit];
      psi[z] = cs * lo + ms * hi;
      psi[z | bit] = ms * lo + cs * hi;
    }
  }
}

void Propagator::taylor(std::span<cplx> psi, double u, double dt) {
  const double mu = (1.0 - u) * c_center_ + u * b_center_;
  const double radius = (1.0 - u) * c_half_ + u * b_half_;
  const int steps = std::max(1, static_cast<int>(std::ceil(radius * std::abs(dt) / kTaylorTheta)));
  const double h = dt / steps;
  const cplx shift_phase(std::cos(-mu * h), std::sin(-mu * h));
  const std::size_t d = psi.size();

  for (int s = 0; s < steps; ++s) {
    std::copy(psi.begin(), psi.end(), term_.begin());
    double acc_norm2 = 0.0;
    for (const auto& a : psi) acc_norm2 += std::norm(a);
    for (int k = 1; k <= kTaylorMaxTerms; ++k) {
      apply_generator(term_, u, next_);
      // term <- (-i h / k) (H - mu) term
      const double f = h / k;
      double term_norm2 = 0.0;
      for (std::size_t z = 0; z < d; ++z) {
        const cplx v = next_[z] - mu * term_[z];
        const cplx t(f * v.imag(), -f * v.real());
        term_[z] = t;
        psi[z] += t;
        term_norm2 += std::norm(t);
      }
      // With ||h (H - mu)|| <= 2 the terms shrink geometrically from k = 3 on,
      // so the tail is bounded by the last term.
      if (k >= 3 && term_norm2 <= kTaylorRelTol * kTaylorRelTol * acc_norm2) break;
    }
    for (auto& a : psi) a *= shift_phase;
  }
}

void Propagator::strang(std::span<cplx> psi, double u, double dt) {
  const int n = strang_substeps(dt);
  const double h = dt / n;
  field_rotation(psi, 0.5 * u * h);
  for (int s = 0; s < n; ++s) {
    diagonal_phase(psi, (1.0 - u) * h);
    field_rotation(psi, (s + 1 < n ? 1.0 : 0.5) * u * h);
  }
}

void Propagator::dense_expm(std::span<cplx> psi, double u, double dt) {
  const Eigen::MatrixXcd H = u * B_->to_dense() + (1.0 - u) * C_->to_dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(H);
  if (eig.info() != Eigen::Success) throw std::runtime_error("dense eigendecomposition failed");
  const auto dim = static_cast<Eigen::Index>(psi.size());
  Eigen::Map<Eigen::VectorXcd> v(psi.data(), dim);
  Eigen::VectorXcd coeff = eig.eigenvectors().adjoint() * v;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double a = -eig.eigenvalues()(i) * dt;
    coeff(i) *= cplx(std::cos(a), std::sin(a));
  }
  v = eig.eigenvectors() * coeff;
}

void Propagator::evolve(std::span<cplx> psi, double u, double dt) {
  if (psi.size() != B_->dim()) {
    throw std::invalid_argument("evolve: state has dimension " + std::to_string(psi.size()) +
                                ", operators " + std::to_string(B_->dim()));
  }
  if (dt == 0.0) return;
  // Single-operator segments have closed forms for the structured kinds.
  if (u == 0.0 && C_->kind() == OperatorKind::Diagonal) {
    diagonal_phase(psi, dt);
    return;
  }
  if (u == 1.0 && B_->kind() == OperatorKind::TransverseField) {
    field_rotation(psi, dt);
    return;
  }
  switch (cfg_.method) {
    case PropagationMethod::Taylor: taylor(psi, u, dt); break;
    case PropagationMethod::StrangSplit: strang(psi, u, dt); break;
    case PropagationMethod::DenseExpm: dense_expm(psi, u, dt); break;
  }
}

StateVector evolve_segment(const StateVector& psi, const OperatorHandle& B, const OperatorHandle& C,
                           double u, double dt, const PropagationConfig& cfg) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("control u must lie in [0, 1]");
  if (!(dt > 0.0)) throw std::invalid_argument("segment duration must be > 0");
  Propagator prop(B, C, cfg);
  StateVector out = psi;
  prop.evolve(out.amplitudes(), u, dt);
  return out;
}

}  // namespace qcontrol
