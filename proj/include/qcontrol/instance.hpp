#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qcontrol/operator.hpp"
#include "qcontrol/state.hpp"

namespace qcontrol {

enum class Family { MaxCutRegular, RandomIsing, LongRangeIsing, Heisenberg };

/// Canonical names used in instance files: maxcut_regular, random_ising,
/// long_range_ising, heisenberg.
std::string to_string(Family family);
Family family_from_string(const std::string& name);

struct Coupling {
  int i = 0;
  int j = 0;
  double value = 0.0;
  friend bool operator==(const Coupling&, const Coupling&) = default;
};

/// Symmetric couplings with zero diagonal; only i < j is stored.
class CouplingMatrix {
 public:
  CouplingMatrix() = default;
  explicit CouplingMatrix(int n_qubits);

  int n_qubits() const { return n_; }
  /// J_ij for i != j, symmetric; 0 on the diagonal.
  double at(int i, int j) const;
  void set(int i, int j, double value);
  /// Nonzero entries with i < j in row-major order.
  std::vector<Coupling> nonzero() const;

  friend bool operator==(const CouplingMatrix&, const CouplingMatrix&) = default;

 private:
  std::size_t index(int i, int j) const;
  int n_ = 0;
  std::vector<double> upper_;
};

struct InstanceParams {
  /// Vertex degree for MaxCutRegular and Heisenberg (regular-graph couplings).
  int degree = 4;
  /// Power-law exponent for LongRangeIsing.
  double alpha = 1.0;
  friend bool operator==(const InstanceParams&, const InstanceParams&) = default;
};

struct ProblemInstance {
  Family family = Family::MaxCutRegular;
  int n_qubits = 0;
  std::uint64_t seed = 0;
  InstanceParams params;
  CouplingMatrix couplings;
  /// Whether the coupling graph is connected (recorded, never enforced).
  bool connected = true;

  friend bool operator==(const ProblemInstance&, const ProblemInstance&) = default;
};

/// Draws an instance; deterministic in (family, n, params, seed).
///
/// Regular graphs come from the pairing (configuration) model: all n*d
/// half-edges are shuffled with a SplitMix64 Fisher-Yates pass and paired
/// consecutively; draws containing a self-loop or repeated edge are rejected,
/// up to 10^4 attempts. RandomIsing draws every J_ij (i < j, row-major)
/// uniformly from [-1, 1). LongRangeIsing uses J_ij = 1 / |i - j|^alpha on an
/// open chain and ignores the seed.
ProblemInstance generate(Family family, int n_qubits, const InstanceParams& params, std::uint64_t seed);

/// Throws std::invalid_argument naming the violated family invariant.
void validate(const ProblemInstance& inst);

struct HamiltonianPair {
  OperatorHandle mixer;    // B = -sum_i sigma^x_i
  OperatorHandle problem;  // C
};

/// Ising families give a Diagonal C with energy sum_{i<j} J_ij z_i z_j;
/// Heisenberg gives a Dense C = sum_{i<j} (J_ij / 3)(XX + YY + ZZ).
HamiltonianPair to_hamiltonians(const ProblemInstance& inst);

/// |+>^N, the ground state of B.
StateVector ground_state_of_B(int n_qubits);

/// Canonical document: schema, family, n_qubits, seed, params, couplings, metadata.
nlohmann::json to_json(const ProblemInstance& inst);
/// Validates the schema and the family invariants; errors name the field.
ProblemInstance instance_from_json(const nlohmann::json& doc);

std::string to_canonical_text(const ProblemInstance& inst);
void save_instance(const ProblemInstance& inst, const std::filesystem::path& path);
ProblemInstance load_instance(const std::filesystem::path& path);

inline constexpr const char* kInstanceSchema = "qcontrol.instance/1";

}  // namespace qcontrol
