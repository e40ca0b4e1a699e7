#pragma once

#include <cmath>
#include <vector>

#include "oracle/dense_oracle.hpp"
#include "qcontrol/instance.hpp"
#include "qcontrol/splitmix.hpp"
#include "qcontrol/state.hpp"

namespace testing {

inline qcontrol::StateVector random_state(int n, std::uint64_t seed, bool normalize = true) {
  qcontrol::SplitMix64 rng(seed);
  std::vector<qcontrol::cplx> a(std::size_t{1} << n);
  double norm2 = 0.0;
  for (auto& v : a) {
    v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    norm2 += std::norm(v);
  }
  if (normalize) {
    for (auto& v : a) v /= std::sqrt(norm2);
  }
  return qcontrol::StateVector(n, std::move(a));
}

inline oracle::Vec to_eigen(const qcontrol::StateVector& s) {
  oracle::Vec v(static_cast<Eigen::Index>(s.dim()));
  for (std::size_t i = 0; i < s.dim(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
  return v;
}

inline double max_diff(const qcontrol::StateVector& s, const oracle::Vec& v) {
  double m = 0.0;
  for (std::size_t i = 0; i < s.dim(); ++i) m = std::max(m, std::abs(s[i] - v(static_cast<Eigen::Index>(i))));
  return m;
}

inline std::vector<oracle::Edge> edges_of(const qcontrol::ProblemInstance& inst) {
  std::vector<oracle::Edge> e;
  for (const auto& c : inst.couplings.nonzero()) e.emplace_back(c.i, c.j, c.value);
  return e;
}

inline oracle::Mat oracle_problem(const qcontrol::ProblemInstance& inst) {
  return inst.family == qcontrol::Family::Heisenberg ? oracle::heisenberg(inst.n_qubits, edges_of(inst))
                                                     : oracle::ising(inst.n_qubits, edges_of(inst));
}

/// The two-spin Ising instance with J_12 = 1.
inline qcontrol::ProblemInstance two_spin() {
  qcontrol::ProblemInstance inst;
  inst.family = qcontrol::Family::RandomIsing;
  inst.n_qubits = 2;
  inst.couplings = qcontrol::CouplingMatrix(2);
  inst.couplings.set(0, 1, 1.0);
  return inst;
}

}  // namespace testing
