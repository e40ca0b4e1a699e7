#include "qcontrol/instance.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "qcontrol/splitmix.hpp"

namespace qcontrol {

namespace {

constexpr int kRegularGraphAttempts = 10000;

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw std::invalid_argument("instance field '" + field + "': " + what);
}

bool graph_connected(const CouplingMatrix& J) {
  const int n = J.n_qubits();
  if (n <= 1) return true;
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w = 0; w < n; ++w) {
      if (w != v && !seen[static_cast<std::size_t>(w)] && J.at(v, w) != 0.0) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == n;
}

CouplingMatrix random_regular_graph(int n, int d, SplitMix64& rng) {
  if (d < 1) throw std::invalid_argument("regular graph degree must be >= 1");
  if (d >= n) {
    throw std::invalid_argument("regular graph degree " + std::to_string(d) + " needs more than " +
                                std::to_string(d) + " vertices, got " + std::to_string(n));
  }
  if ((static_cast<long>(n) * d) % 2 != 0) {
    throw std::invalid_argument("regular graph needs N*d even, got N=" + std::to_string(n) +
                                ", d=" + std::to_string(d));
  }
  std::vector<int> stubs;
  stubs.reserve(static_cast<std::size_t>(n * d));
  for (int attempt = 0; attempt < kRegularGraphAttempts; ++attempt) {
    stubs.clear();
    for (int v = 0; v < n; ++v) {
      for (int s = 0; s < d; ++s) stubs.push_back(v);
    }
    for (std::size_t i = stubs.size() - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.below(i + 1));
      std::swap(stubs[i], stubs[j]);
    }
    std::set<std::pair<int, int>> edges;
    bool ok = true;
    for (std::size_t e = 0; e + 1 < stubs.size(); e += 2) {
      int a = stubs[e], b = stubs[e + 1];
      if (a == b) {
        ok = false;
        break;
      }
      if (a > b) std::swap(a, b);
      if (!edges.emplace(a, b).second) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    CouplingMatrix J(n);
    for (const auto& [a, b] : edges) J.set(a, b, 1.0);
    return J;
  }
  throw std::runtime_error("pairing model failed to produce a simple " + std::to_string(d) +
                           "-regular graph on " + std::to_string(n) + " vertices after " +
                           std::to_string(kRegularGraphAttempts) + " attempts");
}

double long_range_coupling(int i, int j, double alpha) {
  return 1.0 / std::pow(static_cast<double>(std::abs(i - j)), alpha);
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::MaxCutRegular: return "maxcut_regular";
    case Family::RandomIsing: return "random_ising";
    case Family::LongRangeIsing: return "long_range_ising";
    case Family::Heisenberg: return "heisenberg";
  }
  return "?";
}

Family family_from_string(const std::string& name) {
  if (name == "maxcut_regular") return Family::MaxCutRegular;
  if (name == "random_ising") return Family::RandomIsing;
  if (name == "long_range_ising") return Family::LongRangeIsing;
  if (name == "heisenberg") return Family::Heisenberg;
  throw std::invalid_argument("unknown family '" + name + "'");
}

CouplingMatrix::CouplingMatrix(int n_qubits) : n_(n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("coupling matrix needs n_qubits >= 1");
  upper_.assign(static_cast<std::size_t>(n_qubits) * static_cast<std::size_t>(n_qubits - 1) / 2, 0.0);
}

std::size_t CouplingMatrix::index(int i, int j) const {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= n_ || i == j) {
    throw std::out_of_range("coupling index (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") invalid for " + std::to_string(n_) + " qubits");
  }
  // Row-major offset of (i, j) in the strict upper triangle.
  const auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j), sn = static_cast<std::size_t>(n_);
  return si * (2 * sn - si - 1) / 2 + (sj - si - 1);
}

double CouplingMatrix::at(int i, int j) const {
  if (i == j) return 0.0;
  return upper_[index(i, j)];
}

void CouplingMatrix::set(int i, int j, double value) { upper_[index(i, j)] = value; }

std::vector<Coupling> CouplingMatrix::nonzero() const {
  std::vector<Coupling> out;
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      const double v = at(i, j);
      if (v != 0.0) out.push_back({i, j, v});
    }
  }
  return out;
}

ProblemInstance generate(Family family, int n_qubits, const InstanceParams& params, std::uint64_t seed) {
  dimension_for(n_qubits);
  ProblemInstance inst;
  inst.family = family;
  inst.n_qubits = n_qubits;
  inst.seed = seed;
  // Only the parameters the family uses are kept, so the file round-trips.
  if (family == Family::MaxCutRegular || family == Family::Heisenberg) inst.params.degree = params.degree;
  if (family == Family::LongRangeIsing) inst.params.alpha = params.alpha;
  SplitMix64 rng(seed);
  switch (family) {
    case Family::MaxCutRegular:
    case Family::Heisenberg:
      inst.couplings = random_regular_graph(n_qubits, params.degree, rng);
      break;
    case Family::RandomIsing:
      inst.couplings = CouplingMatrix(n_qubits);
      for (int i = 0; i < n_qubits; ++i) {
        for (int j = i + 1; j < n_qubits; ++j) inst.couplings.set(i, j, rng.uniform(-1.0, 1.0));
      }
      break;
    case Family::LongRangeIsing:
      if (!(params.alpha >= 0.0) || !std::isfinite(params.alpha)) {
        throw std::invalid_argument("long-range exponent alpha must be finite and >= 0");
      }
      inst.couplings = CouplingMatrix(n_qubits);
      for (int i = 0; i < n_qubits; ++i) {
        for (int j = i + 1; j < n_qubits; ++j) inst.couplings.set(i, j, long_range_coupling(i, j, params.alpha));
      }
      break;
  }
  inst.connected = graph_connected(inst.couplings);
  validate(inst);
  return inst;
}

void validate(const ProblemInstance& inst) {
  if (inst.n_qubits < 1 || inst.n_qubits > 24) field_error("n_qubits", "must be in [1, 24]");
  if (inst.couplings.n_qubits() != inst.n_qubits) field_error("couplings", "size does not match n_qubits");
  const int n = inst.n_qubits;
  switch (inst.family) {
    case Family::MaxCutRegular:
    case Family::Heisenberg: {
      const int d = inst.params.degree;
      if (d < 1) field_error("params.degree", "must be >= 1");
      if ((static_cast<long>(n) * d) % 2 != 0) {
        field_error("params.degree", "N*d must be even (N=" + std::to_string(n) + ", d=" + std::to_string(d) + ")");
      }
      for (int i = 0; i < n; ++i) {
        int deg = 0;
        for (int j = 0; j < n; ++j) {
          const double v = inst.couplings.at(i, j);
          if (v != 0.0 && v != 1.0) {
            field_error("couplings", "J_(" + std::to_string(std::min(i, j)) + "," + std::to_string(std::max(i, j)) +
                                         ") must be 0 or 1 for regular-graph couplings");
          }
          deg += v == 1.0;
        }
        if (deg != d) {
          field_error("couplings", "vertex " + std::to_string(i) + " has degree " + std::to_string(deg) +
                                       ", expected " + std::to_string(d));
        }
      }
      break;
    }
    case Family::RandomIsing:
      for (const auto& c : inst.couplings.nonzero()) {
        if (!(c.value >= -1.0 && c.value <= 1.0)) {
          field_error("couplings", "J_(" + std::to_string(c.i) + "," + std::to_string(c.j) + ") = " +
                                       std::to_string(c.value) + " outside [-1, 1]");
        }
      }
      break;
    case Family::LongRangeIsing:
      if (!(inst.params.alpha >= 0.0)) field_error("params.alpha", "must be >= 0");
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          if (inst.couplings.at(i, j) != long_range_coupling(i, j, inst.params.alpha)) {
            field_error("couplings", "J_(" + std::to_string(i) + "," + std::to_string(j) +
                                         ") differs from 1/|i-j|^alpha");
          }
        }
      }
      break;
  }
}

HamiltonianPair to_hamiltonians(const ProblemInstance& inst) {
  validate(inst);
  const int n = inst.n_qubits;
  const std::size_t d = dimension_for(n);
  auto mixer = OperatorHandle::transverse_field(std::vector<double>(static_cast<std::size_t>(n), -1.0));
  const auto edges = inst.couplings.nonzero();

  if (inst.family != Family::Heisenberg) {
    std::vector<double> energy(d, 0.0);
    for (std::size_t z = 0; z < d; ++z) {
      double e = 0.0;
      for (const auto& c : edges) {
        const bool differ = ((z >> c.i) ^ (z >> c.j)) & 1U;
        e += differ ? -c.value : c.value;
      }
      energy[z] = e;
    }
    return {std::move(mixer), OperatorHandle::diagonal(n, std::move(energy))};
  }

  // XX + YY exchanges antiparallel pairs with amplitude 2 and annihilates
  // parallel ones; ZZ is diagonal.
  const auto dim = static_cast<Eigen::Index>(d);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& c : edges) {
    const double w = c.value / 3.0;
    const std::size_t mask = (std::size_t{1} << c.i) | (std::size_t{1} << c.j);
    for (std::size_t z = 0; z < d; ++z) {
      const bool differ = ((z >> c.i) ^ (z >> c.j)) & 1U;
      const auto zi = static_cast<Eigen::Index>(z);
      m(zi, zi) += differ ? -w : w;
      if (differ) m(static_cast<Eigen::Index>(z ^ mask), zi) += 2.0 * w;
    }
  }
  return {std::move(mixer), OperatorHandle::dense(n, std::move(m))};
}

StateVector ground_state_of_B(int n_qubits) {
  const std::size_t d = dimension_for(n_qubits);
  return StateVector(n_qubits, std::vector<cplx>(d, cplx(1.0 / std::sqrt(static_cast<double>(d)), 0.0)));
}

namespace {

template <class T>
T required(const nlohmann::json& doc, const std::string& field, const std::string& prefix = "") {
  if (!doc.contains(field)) field_error(prefix + field, "missing");
  try {
    return doc.at(field).get<T>();
  } catch (const nlohmann::json::exception& e) {
    field_error(prefix + field, std::string("wrong type (") + e.what() + ")");
  }
}

nlohmann::ordered_json ordered(const ProblemInstance& inst) {
  // Field order is part of the canonical form.
  nlohmann::ordered_json doc;
  doc["schema"] = kInstanceSchema;
  doc["family"] = to_string(inst.family);
  doc["n_qubits"] = inst.n_qubits;
  doc["seed"] = inst.seed;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  if (inst.family == Family::MaxCutRegular || inst.family == Family::Heisenberg) params["degree"] = inst.params.degree;
  if (inst.family == Family::LongRangeIsing) params["alpha"] = inst.params.alpha;
  doc["params"] = params;
  nlohmann::ordered_json couplings = nlohmann::ordered_json::array();
  for (const auto& c : inst.couplings.nonzero()) {
    nlohmann::ordered_json entry;
    entry["i"] = c.i;
    entry["j"] = c.j;
    entry["J"] = c.value;
    couplings.push_back(entry);
  }
  doc["couplings"] = couplings;
  doc["metadata"] = nlohmann::ordered_json{{"connected", inst.connected}};
  return doc;
}

}  // namespace

ProblemInstance instance_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("instance document must be a JSON object");
  const auto schema = required<std::string>(doc, "schema");
  if (schema != kInstanceSchema) field_error("schema", "expected '" + std::string(kInstanceSchema) + "', got '" + schema + "'");

  ProblemInstance inst;
  try {
    inst.family = family_from_string(required<std::string>(doc, "family"));
  } catch (const std::invalid_argument& e) {
    field_error("family", e.what());
  }
  inst.n_qubits = required<int>(doc, "n_qubits");
  if (inst.n_qubits < 1 || inst.n_qubits > 24) field_error("n_qubits", "must be in [1, 24]");
  inst.seed = required<std::uint64_t>(doc, "seed");

  const auto params = doc.contains("params") ? doc.at("params") : nlohmann::json::object();
  if (!params.is_object()) field_error("params", "must be an object");
  if (inst.family == Family::MaxCutRegular || inst.family == Family::Heisenberg) {
    inst.params.degree = required<int>(params, "degree", "params.");
  }
  if (inst.family == Family::LongRangeIsing) inst.params.alpha = required<double>(params, "alpha", "params.");

  if (!doc.contains("couplings") || !doc.at("couplings").is_array()) field_error("couplings", "missing or not an array");
  inst.couplings = CouplingMatrix(inst.n_qubits);
  std::set<std::pair<int, int>> seen;
  for (const auto& entry : doc.at("couplings")) {
    const int i = required<int>(entry, "i");
    const int j = required<int>(entry, "j");
    const double v = required<double>(entry, "J");
    if (i < 0 || j < 0 || i >= inst.n_qubits || j >= inst.n_qubits || i >= j) {
      field_error("couplings", "entry (" + std::to_string(i) + ", " + std::to_string(j) + ") must satisfy 0 <= i < j < N");
    }
    if (!std::isfinite(v)) field_error("couplings", "non-finite J");
    if (!seen.emplace(i, j).second) {
      field_error("couplings", "duplicate entry (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    }
    inst.couplings.set(i, j, v);
  }
  inst.connected = graph_connected(inst.couplings);
  if (doc.contains("metadata") && doc.at("metadata").contains("connected")) {
    const auto& flag = doc.at("metadata").at("connected");
    if (!flag.is_boolean() || flag.get<bool>() != inst.connected) {
      field_error("metadata.connected", "does not match the coupling graph");
    }
  }
  validate(inst);
  return inst;
}

nlohmann::json to_json(const ProblemInstance& inst) { return nlohmann::json::parse(ordered(inst).dump()); }

std::string to_canonical_text(const ProblemInstance& inst) { return ordered(inst).dump(2) + "\n"; }

void save_instance(const ProblemInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << to_canonical_text(inst);
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

ProblemInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open instance file '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("instance file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return instance_from_json(doc);
}

}  // namespace qcontrol
