#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "qcontrol/instance.hpp"

using namespace qcontrol;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "qcontrol_unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("instances") {
  TEST_CASE("maxcut 4-regular on 8 vertices") {
    const ProblemInstance inst = generate(Family::MaxCutRegular, 8, {.degree = 4}, 7);
    const auto edges = inst.couplings.nonzero();
    CHECK(edges.size() == 16);
    std::vector<int> deg(8, 0);
    for (const auto& c : edges) {
      CHECK(c.value == 1.0);
      ++deg[c.i];
      ++deg[c.j];
    }
    CHECK(std::all_of(deg.begin(), deg.end(), [](int d) { return d == 4; }));
  }

  TEST_CASE("long-range limit of large alpha") {
    const ProblemInstance inst = generate(Family::LongRangeIsing, 5, {.alpha = 64}, 0);
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j) {
        if (j == i + 1) {
          CHECK(inst.couplings.at(i, j) == 1.0);
        } else {
          CHECK(std::abs(inst.couplings.at(i, j)) <= std::ldexp(1.0, -64));
        }
      }
  }

  TEST_CASE("generation is deterministic") {
    CHECK(generate(Family::RandomIsing, 6, {}, 42) == generate(Family::RandomIsing, 6, {}, 42));
    CHECK(generate(Family::MaxCutRegular, 10, {}, 3) == generate(Family::MaxCutRegular, 10, {}, 3));
    CHECK(to_canonical_text(generate(Family::Heisenberg, 6, {.degree = 3}, 9)) ==
          to_canonical_text(generate(Family::Heisenberg, 6, {.degree = 3}, 9)));
    CHECK_FALSE(generate(Family::RandomIsing, 6, {}, 42) == generate(Family::RandomIsing, 6, {}, 43));
  }

  TEST_CASE("pinned SplitMix64 stream") {
    SplitMix64 rng(0);
    CHECK(rng.next() == 0xe220a8397b1dcdafULL);
    CHECK(rng.next() == 0x6e789e6aa1b965f4ULL);
  }

  TEST_CASE("odd N*d is rejected naming the constraint") {
    const std::string msg = error_of([] { generate(Family::MaxCutRegular, 5, {.degree = 3}, 1); });
    CHECK(msg.find("N*d") != std::string::npos);
    CHECK_THROWS_AS(generate(Family::MaxCutRegular, 5, {.degree = 3}, 1), std::invalid_argument);
  }

  TEST_CASE("family invariants over 1000 seeds") {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const int n = 4 + static_cast<int>(seed % 5);
      const ProblemInstance mc = generate(Family::MaxCutRegular, n % 2 ? n + 1 : n, {.degree = 3}, seed);
      std::vector<int> deg(mc.n_qubits, 0);
      for (const auto& c : mc.couplings.nonzero()) {
        REQUIRE(c.value == 1.0);
        ++deg[c.i];
        ++deg[c.j];
      }
      REQUIRE(std::all_of(deg.begin(), deg.end(), [](int d) { return d == 3; }));

      const ProblemInstance ri = generate(Family::RandomIsing, n, {}, seed);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          REQUIRE(ri.couplings.at(i, j) >= -1.0);
          REQUIRE(ri.couplings.at(i, j) <= 1.0);
          REQUIRE(ri.couplings.at(i, j) == ri.couplings.at(j, i));
        }
      REQUIRE(ri.couplings.at(1, 1) == 0.0);

      const double alpha = static_cast<double>(seed % 7) * 0.5;
      const ProblemInstance lr = generate(Family::LongRangeIsing, n, {.alpha = alpha}, seed);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) REQUIRE(lr.couplings.at(i, j) == 1.0 / std::pow(j - i, alpha));
      REQUIRE_NOTHROW(validate(mc));
      REQUIRE_NOTHROW(validate(ri));
      REQUIRE_NOTHROW(validate(lr));
    }
  }

  TEST_CASE("two-spin problem diagonal") {
    const auto [B, C] = to_hamiltonians(testing::two_spin());
    CHECK(C.kind() == OperatorKind::Diagonal);
    CHECK(C.energies() == std::vector<double>{1, -1, -1, 1});
    CHECK(B.kind() == OperatorKind::TransverseField);
    CHECK(B.field_coefficients() == std::vector<double>{-1, -1});
  }

  TEST_CASE("mixer ground state") {
    CHECK(max_abs_diff(ground_state_of_B(1), StateVector(1, {M_SQRT1_2, M_SQRT1_2})) < 1e-15);
    CHECK(max_abs_diff(ground_state_of_B(2), StateVector(2, {0.5, 0.5, 0.5, 0.5})) == 0.0);
    for (auto fam : {Family::MaxCutRegular, Family::RandomIsing, Family::LongRangeIsing, Family::Heisenberg}) {
      const ProblemInstance inst = generate(fam, 6, {.degree = 3}, 5);
      const auto [B, C] = to_hamiltonians(inst);
      const StateVector plus = ground_state_of_B(6);
      CHECK(max_abs_diff(apply(B, plus), cplx(-6.0) * plus) < 1e-14);
      CHECK(expectation(B, plus) == doctest::Approx(-6.0).epsilon(1e-14));
    }
  }

  TEST_CASE("heisenberg two-spin spectrum") {
    ProblemInstance inst;
    inst.family = Family::Heisenberg;
    inst.n_qubits = 2;
    inst.params.degree = 1;
    inst.couplings = CouplingMatrix(2);
    inst.couplings.set(0, 1, 1.0);
    const auto [B, C] = to_hamiltonians(inst);
    CHECK(C.kind() == OperatorKind::Dense);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(C.matrix());
    const Eigen::VectorXd ev = eig.eigenvalues();
    CHECK(ev(0) == doctest::Approx(-1.0).epsilon(1e-14));
    for (int i = 1; i < 4; ++i) CHECK(ev(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }

  TEST_CASE("problem operators match the Pauli oracle") {
    for (auto fam : {Family::MaxCutRegular, Family::RandomIsing, Family::LongRangeIsing, Family::Heisenberg}) {
      const ProblemInstance inst = generate(fam, 6, {.degree = 3, .alpha = 1.5}, 12);
      const auto [B, C] = to_hamiltonians(inst);
      CHECK((C.to_dense() - testing::oracle_problem(inst)).cwiseAbs().maxCoeff() < 1e-14);
      CHECK((B.to_dense() - oracle::mixer(6)).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("ising diagonal matches a loop over spin configurations") {
    const ProblemInstance inst = generate(Family::RandomIsing, 7, {}, 99);
    const auto [B, C] = to_hamiltonians(inst);
    for (std::size_t z = 0; z < (1u << 7); ++z) {
      double e = 0.0;
      for (int i = 0; i < 7; ++i)
        for (int j = i + 1; j < 7; ++j) {
          const int si = (z >> i) & 1 ? -1 : 1, sj = (z >> j) & 1 ? -1 : 1;
          e += inst.couplings.at(i, j) * si * sj;
        }
      CHECK(C.energies()[z] == doctest::Approx(e).epsilon(1e-15));
    }
  }

  TEST_CASE("save and load round trip") {
    for (auto fam : {Family::MaxCutRegular, Family::RandomIsing, Family::LongRangeIsing, Family::Heisenberg}) {
      const ProblemInstance inst = generate(fam, 8, {.degree = 3, .alpha = 2.5}, 314);
      const auto path = scratch(to_string(fam) + ".instance.json");
      save_instance(inst, path);
      CHECK(load_instance(path) == inst);
      CHECK(instance_from_json(to_json(inst)) == inst);
    }
  }

  TEST_CASE("invalid documents name the offending field") {
    nlohmann::json doc = {{"schema", kInstanceSchema},
                          {"family", "random_ising"},
                          {"n_qubits", 2},
                          {"seed", 0},
                          {"couplings", {{{"i", 0}, {"j", 1}, {"J", 1.5}}}}};
    std::string msg = error_of([&] { instance_from_json(doc); });
    CHECK(msg.find("'couplings'") != std::string::npos);
    CHECK(msg.find("1.5") != std::string::npos);

    doc["couplings"][0]["J"] = 0.5;
    doc.erase("n_qubits");
    CHECK(error_of([&] { instance_from_json(doc); }).find("'n_qubits'") != std::string::npos);

    doc["n_qubits"] = 2;
    doc["schema"] = "something/2";
    CHECK(error_of([&] { instance_from_json(doc); }).find("'schema'") != std::string::npos);

    doc["schema"] = kInstanceSchema;
    doc["couplings"][0]["j"] = 2;
    CHECK(error_of([&] { instance_from_json(doc); }).find("'couplings'") != std::string::npos);

    doc["couplings"][0]["j"] = 1;
    doc["family"] = "maxcut_regular";
    CHECK(error_of([&] { instance_from_json(doc); }).find("'params") != std::string::npos);
  }

  TEST_CASE("hand-written two-spin file") {
    const auto path = scratch("two_spin.instance.json");
    std::ofstream(path) << R"({"schema": "qcontrol.instance/1", "family": "random_ising", "n_qubits": 2,
      "seed": 0, "couplings": [{"i": 0, "j": 1, "J": 1.0}]})";
    const ProblemInstance inst = load_instance(path);
    CHECK(to_hamiltonians(inst).problem.energies() == std::vector<double>{1, -1, -1, 1});
    CHECK(inst == testing::two_spin());
  }
}
