#include "qcontrol/adjoint.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qcontrol {

namespace {

// Phi_X = i<k|X|x> + c.c. = -2 Im<k|X|x>
double phi_of(cplx kx) { return -2.0 * kx.imag(); }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Node terms for C diagonal (energies c) and B = sum_q h_q X_q without
// temporaries:
//   <k|B|x>     = sum_q h_q sum_z conj(k_z) x_{z^q}
//   <k|[B,C]|x> = sum_q h_q sum_z conj(k_z) x_{z^q} (c_{z^q} - c_z)
void structured_node_terms(const OperatorHandle& B, const OperatorHandle& C, std::span<const cplx> x,
                           std::span<const cplx> k, double& phi_b, double& phi_c, double& phi_comm, cplx& kx) {
  const auto& c = C.energies();
  const auto& h = B.field_coefficients();
  const std::size_t d = x.size();
  cplx sc{}, sx{};
  for (std::size_t z = 0; z < d; ++z) {
    const cplx p = std::conj(k[z]) * x[z];
    sx += p;
    sc += c[z] * p;
  }
  cplx sb{}, scomm{};
  for (std::size_t q = 0; q < h.size(); ++q) {
    if (h[q] == 0.0) continue;
    const std::size_t bit = std::size_t{1} << q;
    cplx s1{}, s2{};
    for (std::size_t z = 0; z < d; ++z) {
      const cplx p = std::conj(k[z]) * x[z ^ bit];
      s1 += p;
      s2 += (c[z ^ bit] - c[z]) * p;
    }
    sb += h[q] * s1;
    scomm += h[q] * s2;
  }
  phi_b = phi_of(sb);
  phi_c = phi_of(sc);
  phi_comm = -2.0 * scomm.real();
  kx = sx;
}

}  // namespace

ControlProblem ControlProblem::from_instance(const ProblemInstance& inst) {
  auto [B, C] = to_hamiltonians(inst);
  return {std::move(B), std::move(C), ground_state_of_B(inst.n_qubits)};
}

Schedule Schedule::from_grid(const GridProtocol& g) {
  return {g.samples(), std::vector<double>(g.samples().size(), g.dt())};
}

Schedule Schedule::from_bangs(const BangSequence& b) {
  Schedule s;
  for (const auto& seg : b.segments()) {
    s.u.push_back(seg.level == Level::Mixer ? 1.0 : 0.0);
    s.duration.push_back(seg.duration);
  }
  return s;
}

AdjointEngine::AdjointEngine(const ControlProblem& problem, PropagationConfig cfg)
    : problem_(&problem),
      prop_(problem.mixer, problem.problem, cfg),
      k_(problem.initial.n_qubits()),
      bx_(problem.initial.n_qubits()),
      cx_(problem.initial.n_qubits()),
      bk_(problem.initial.n_qubits()),
      ck_(problem.initial.n_qubits()) {
  if (problem.initial.dim() != problem.mixer.dim()) {
    throw std::invalid_argument("initial state does not match the operator dimension");
  }
}

double AdjointEngine::forward(const Schedule& s, std::vector<StateVector>* nodes) {
  if (s.u.size() != s.duration.size()) throw std::invalid_argument("schedule u/duration length mismatch");
  StateVector x = problem_->initial;
  if (nodes) {
    nodes->resize(s.u.size() + 1);
    (*nodes)[0] = x;
  }
  for (std::size_t j = 0; j < s.u.size(); ++j) {
    prop_.evolve(x.amplitudes(), s.u[j], s.duration[j]);
    if (nodes) (*nodes)[j + 1] = x;
  }
  problem_->problem.apply_into(x.amplitudes(), cx_.amplitudes());
  return inner(x, cx_).real();
}

NodeTerms AdjointEngine::backward(const Schedule& s, const std::vector<StateVector>& x_nodes,
                                  std::vector<StateVector>* k_nodes) {
  const std::size_t m = s.u.size();
  if (x_nodes.size() != m + 1) throw std::invalid_argument("backward sweep needs M + 1 forward nodes");
  const auto& B = problem_->mixer;
  const auto& C = problem_->problem;

  NodeTerms out;
  out.phi_b.resize(m + 1);
  out.phi_c.resize(m + 1);
  out.phi_comm.resize(m + 1);
  out.overlap_kx.resize(m + 1);
  if (k_nodes) k_nodes->resize(m + 1);

  C.apply_into(x_nodes[m].amplitudes(), k_.amplitudes());
  for (std::size_t n = m + 1; n-- > 0;) {
    if (n < m) prop_.evolve(k_.amplitudes(), s.u[n], -s.duration[n]);
    const StateVector& x = x_nodes[n];
    if (prop_.structured_pair()) {
      structured_node_terms(B, C, x.amplitudes(), k_.amplitudes(), out.phi_b[n], out.phi_c[n], out.phi_comm[n],
                            out.overlap_kx[n]);
      if (k_nodes) (*k_nodes)[n] = k_;
      continue;
    }
    B.apply_into(x.amplitudes(), bx_.amplitudes());
    C.apply_into(x.amplitudes(), cx_.amplitudes());
    B.apply_into(k_.amplitudes(), bk_.amplitudes());
    C.apply_into(k_.amplitudes(), ck_.amplitudes());
    out.phi_b[n] = phi_of(inner(k_, bx_));
    out.phi_c[n] = phi_of(inner(k_, cx_));
    // <k|[B,C]|x> = <Bk|Cx> - <Ck|Bx>; Phi_{i[B,C]} = -2 Re of it.
    out.phi_comm[n] = -2.0 * (inner(bk_, cx_) - inner(ck_, bx_)).real();
    out.overlap_kx[n] = inner(k_, x);
    if (k_nodes) (*k_nodes)[n] = k_;
  }
  return out;
}

SegmentPhi segment_average(const NodeTerms& nodes, std::size_t j, double u, double dt) {
  const double dcomm = nodes.phi_comm[j + 1] - nodes.phi_comm[j];
  SegmentPhi s;
  s.phi_b = 0.5 * (nodes.phi_b[j] + nodes.phi_b[j + 1]) + dt / 12.0 * (1.0 - u) * dcomm;
  s.phi_c = 0.5 * (nodes.phi_c[j] + nodes.phi_c[j + 1]) - dt / 12.0 * u * dcomm;
  return s;
}

double AdjointEngine::cost_and_gradient(const Schedule& s, std::vector<double>& phi) {
  const double cost = forward(s, &x_nodes_);
  const NodeTerms nodes = backward(s, x_nodes_);
  phi.resize(s.u.size());
  for (std::size_t j = 0; j < s.u.size(); ++j) phi[j] = segment_average(nodes, j, s.u[j], s.duration[j]).phi();
  return cost;
}

ForwardResult forward_sweep(const ControlProblem& problem, const GridProtocol& g, const PropagationConfig& cfg) {
  AdjointEngine engine(problem, cfg);
  ForwardResult r;
  r.cost = engine.forward(Schedule::from_grid(g), &r.x);
  return r;
}

std::vector<StateVector> backward_sweep(const ControlProblem& problem, const GridProtocol& g,
                                        const StateVector& x_final, const PropagationConfig& cfg) {
  if (x_final.dim() != problem.problem.dim()) throw std::invalid_argument("x_final has the wrong dimension");
  Propagator prop(problem.mixer, problem.problem, cfg);
  const int m = g.segments();
  std::vector<StateVector> k(static_cast<std::size_t>(m) + 1);
  k[static_cast<std::size_t>(m)] = apply(problem.problem, x_final);
  for (int n = m - 1; n >= 0; --n) {
    StateVector next = k[static_cast<std::size_t>(n) + 1];
    prop.evolve(next.amplitudes(), g[static_cast<std::size_t>(n)], -g.dt());
    k[static_cast<std::size_t>(n)] = std::move(next);
  }
  return k;
}

SweepResult phi_series(const ControlProblem& problem, const GridProtocol& g, const PropagationConfig& cfg) {
  AdjointEngine engine(problem, cfg);
  const Schedule s = Schedule::from_grid(g);
  SweepResult r;
  r.cost_J = engine.forward(s, &r.x_trajectory);
  const NodeTerms nodes = engine.backward(s, r.x_trajectory, &r.k_trajectory);
  const std::size_t m = s.u.size();
  r.phi.resize(m);
  r.phi_b.resize(m);
  r.phi_c.resize(m);
  r.hbb.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const SegmentPhi seg = segment_average(nodes, j, s.u[j], g.dt());
    r.phi_b[j] = seg.phi_b;
    r.phi_c[j] = seg.phi_c;
    r.phi[j] = seg.phi();
    r.hbb[j] = s.u[j] * seg.phi_b + (1.0 - s.u[j]) * seg.phi_c;
  }
  r.node_phi_b = nodes.phi_b;
  r.node_phi_c = nodes.phi_c;
  r.node_phi_comm = nodes.phi_comm;
  r.overlap_kx = nodes.overlap_kx;
  r.node_phi.resize(m + 1);
  for (std::size_t n = 0; n <= m; ++n) r.node_phi[n] = nodes.phi_c[n] - nodes.phi_b[n];
  return r;
}

double nested_commutator_phi(const OperatorHandle& B, const OperatorHandle& C, const StateVector& x,
                             const StateVector& k, CommutatorTerm which) {
  if (x.dim() != k.dim() || x.dim() != B.dim() || x.dim() != C.dim()) {
    throw std::invalid_argument("nested_commutator_phi: dimension mismatch");
  }
  const StateVector bx = apply(B, x), cx = apply(C, x);
  const StateVector bk = apply(B, k), ck = apply(C, k);
  switch (which) {
    case CommutatorTerm::BC:
      return -2.0 * (inner(bk, cx) - inner(ck, bx)).real();
    case CommutatorTerm::BCB: {
      // [[B,C],B] = 2BCB - CB^2 - B^2C
      const cplx v = 2.0 * inner(bk, apply(C, bx)) - inner(ck, apply(B, bx)) - inner(apply(B, bk), cx);
      return phi_of(v);
    }
    case CommutatorTerm::BCC: {
      // [[B,C],C] = BC^2 - 2CBC + C^2B
      const cplx v = inner(bk, apply(C, cx)) - 2.0 * inner(ck, apply(B, cx)) + inner(apply(C, ck), bx);
      return phi_of(v);
    }
  }
  return 0.0;
}

std::vector<double> control_hamiltonian_series(const SweepResult& sweep, const GridProtocol& g) {
  if (sweep.phi_b.size() != static_cast<std::size_t>(g.segments())) {
    throw std::invalid_argument("sweep and protocol have different segment counts");
  }
  std::vector<double> h(sweep.phi_b.size());
  for (std::size_t j = 0; j < h.size(); ++j) h[j] = g[j] * sweep.phi_b[j] + (1.0 - g[j]) * sweep.phi_c[j];
  return h;
}

std::string sweep_csv(const SweepResult& sweep, const GridProtocol& g) {
  std::string out = std::string(kSweepCsvHeader) + "\n";
  for (int j = 0; j < g.segments(); ++j) {
    const auto sj = static_cast<std::size_t>(j);
    out += std::to_string(j) + "," + fmt(g.segment_mid(j)) + "," + fmt(g[sj]) + "," + fmt(sweep.phi[sj]) + "," +
           fmt(sweep.phi_b[sj]) + "," + fmt(sweep.phi_c[sj]) + "," + fmt(sweep.hbb[sj]) + "," +
           fmt(sweep.overlap_kx[sj].real()) + "," + fmt(sweep.overlap_kx[sj].imag()) + "\n";
  }
  return out;
}

}  // namespace qcontrol
