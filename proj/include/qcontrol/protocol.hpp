#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace qcontrol {

inline constexpr int kDefaultGridSegments = 1001;

/// Piecewise-constant control on M equal segments of [0, t_f].
class GridProtocol {
 public:
  /// Throws std::invalid_argument unless t_f > 0, M >= 2 and every sample is
  /// in [0, 1].
  GridProtocol(double t_f, std::vector<double> samples);

  static GridProtocol constant(double t_f, int segments, double value);

  double t_f() const { return t_f_; }
  int segments() const { return static_cast<int>(samples_.size()); }
  double dt() const { return t_f_ / static_cast<double>(samples_.size()); }
  const std::vector<double>& samples() const { return samples_; }
  double operator[](std::size_t i) const { return samples_[i]; }
  double segment_start(int i) const { return dt() * i; }
  double segment_mid(int i) const { return dt() * (i + 0.5); }

  friend bool operator==(const GridProtocol&, const GridProtocol&) = default;

 private:
  double t_f_;
  std::vector<double> samples_;
};

enum class Level : int { Problem = 0, Mixer = 1 };

struct Bang {
  Level level = Level::Problem;
  double duration = 0.0;
  friend bool operator==(const Bang&, const Bang&) = default;
};

/// Alternating bangs C, B, C, B, ..., starting with C (u = 0) and ending
/// with B (u = 1). Zero durations are allowed; alternation is structural.
class BangSequence {
 public:
  /// Throws std::invalid_argument if the levels do not alternate from
  /// Problem to Mixer, a duration is negative, or the sum differs from t_f
  /// by more than 1e-12 (relative to max(1, t_f)).
  BangSequence(double t_f, std::vector<Bang> segments);

  /// Builds C/B pairs from the duration vector (d_0 on C, d_1 on B, ...).
  static BangSequence from_durations(double t_f, const std::vector<double>& durations);
  /// p pairs with every duration t_f / (2p).
  static BangSequence equal(double t_f, int p);

  double t_f() const { return t_f_; }
  int pairs() const { return static_cast<int>(segments_.size() / 2); }
  const std::vector<Bang>& segments() const { return segments_; }
  std::vector<double> durations() const;

  friend bool operator==(const BangSequence&, const BangSequence&) = default;

 private:
  double t_f_;
  std::vector<Bang> segments_;
};

/// The optimization vector of a bang sequence and its feasible set
/// {d >= 0, sum d = total}.
struct BangParameters {
  std::vector<double> durations;
  double total = 0.0;
  std::vector<Level> levels;
};

BangParameters bang_parameter_view(const BangSequence& b);
BangSequence rebuild(const BangParameters& view);

/// Grid image of a bang sequence: each sample is the fraction of its
/// segment spent at level 1. Throws std::invalid_argument naming the first
/// nonzero bang that is shorter than one grid segment.
GridProtocol to_grid(const BangSequence& b, int segments);

/// Symmetric product-formula image of a grid protocol with p C/B pairs.
///
/// Over p equal windows, gamma_w = integral of (1 - u) and beta_w = integral
/// of u. The mixer pulses are split in half at window boundaries:
/// C(gamma_1) B((beta_1 + beta_2)/2) ... C(gamma_p) B(beta_p / 2 + beta_1 / 2).
/// The leading half-pulse B(beta_1 / 2) of the symmetric product acts on the
/// B-eigenstate start as a global phase, so its duration is carried by the
/// last mixer pulse to keep the total at t_f.
BangSequence trotterize(const GridProtocol& g, int p);

/// Protocol CSV: header "t_start,t_end,u", one row per segment or bang.
std::string protocol_csv(const GridProtocol& g);
std::string protocol_csv(const BangSequence& b);
GridProtocol grid_from_csv(const std::string& text);

/// Bang sequence JSON: {"schema", "t_f", "segments": [{"level", "duration"}]}.
nlohmann::json to_json(const BangSequence& b);
BangSequence bangs_from_json(const nlohmann::json& doc);

inline constexpr const char* kBangSchema = "qcontrol.bangs/1";

}  // namespace qcontrol
