#include "qcontrol/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qcontrol {

namespace {

constexpr double kSumTol = 1e-12;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Integral of a piecewise-constant grid over [a, b].
double grid_integral(const GridProtocol& g, double a, double b) {
  const double dt = g.dt();
  const int m = g.segments();
  int first = std::clamp(static_cast<int>(std::floor(a / dt)), 0, m - 1);
  double total = 0.0;
  for (int i = first; i < m; ++i) {
    const double lo = std::max(a, dt * i);
    const double hi = std::min(b, dt * (i + 1));
    if (hi <= lo) {
      if (dt * i >= b) break;
      continue;
    }
    total += g[static_cast<std::size_t>(i)] * (hi - lo);
  }
  return total;
}

}  // namespace

GridProtocol::GridProtocol(double t_f, std::vector<double> samples) : t_f_(t_f), samples_(std::move(samples)) {
  if (!(t_f_ > 0.0) || !std::isfinite(t_f_)) throw std::invalid_argument("grid protocol needs t_f > 0");
  if (samples_.size() < 2) throw std::invalid_argument("grid protocol needs at least 2 segments");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!(samples_[i] >= 0.0 && samples_[i] <= 1.0)) {
      throw std::invalid_argument("grid sample " + std::to_string(i) + " = " + fmt(samples_[i]) + " outside [0, 1]");
    }
  }
}

GridProtocol GridProtocol::constant(double t_f, int segments, double value) {
  if (segments < 2) throw std::invalid_argument("grid protocol needs at least 2 segments");
  return GridProtocol(t_f, std::vector<double>(static_cast<std::size_t>(segments), value));
}

BangSequence::BangSequence(double t_f, std::vector<Bang> segments) : t_f_(t_f), segments_(std::move(segments)) {
  if (!(t_f_ > 0.0) || !std::isfinite(t_f_)) throw std::invalid_argument("bang sequence needs t_f > 0");
  if (segments_.empty() || segments_.size() % 2 != 0) {
    throw std::invalid_argument("bang sequence needs a positive even number of segments");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Level expected = i % 2 == 0 ? Level::Problem : Level::Mixer;
    if (segments_[i].level != expected) {
      throw std::invalid_argument("bang " + std::to_string(i) + " breaks the C/B alternation");
    }
    if (!(segments_[i].duration >= 0.0) || !std::isfinite(segments_[i].duration)) {
      throw std::invalid_argument("bang " + std::to_string(i) + " has negative duration");
    }
    sum += segments_[i].duration;
  }
  if (std::abs(sum - t_f_) > kSumTol * std::max(1.0, t_f_)) {
    throw std::invalid_argument("bang durations sum to " + fmt(sum) + ", expected t_f = " + fmt(t_f_));
  }
}

BangSequence BangSequence::from_durations(double t_f, const std::vector<double>& durations) {
  std::vector<Bang> segs;
  segs.reserve(durations.size());
  for (std::size_t i = 0; i < durations.size(); ++i) {
    segs.push_back({i % 2 == 0 ? Level::Problem : Level::Mixer, durations[i]});
  }
  return BangSequence(t_f, std::move(segs));
}

BangSequence BangSequence::equal(double t_f, int p) {
  if (p < 1) throw std::invalid_argument("bang sequence needs p >= 1");
  return from_durations(t_f, std::vector<double>(static_cast<std::size_t>(2 * p), t_f / (2.0 * p)));
}

std::vector<double> BangSequence::durations() const {
  std::vector<double> d;
  d.reserve(segments_.size());
  for (const auto& s : segments_) d.push_back(s.duration);
  return d;
}

BangParameters bang_parameter_view(const BangSequence& b) {
  BangParameters v;
  v.total = b.t_f();
  for (const auto& s : b.segments()) {
    v.durations.push_back(s.duration);
    v.levels.push_back(s.level);
  }
  return v;
}

BangSequence rebuild(const BangParameters& view) {
  if (view.levels.size() != view.durations.size()) throw std::invalid_argument("bang view is inconsistent");
  std::vector<Bang> segs;
  for (std::size_t i = 0; i < view.durations.size(); ++i) segs.push_back({view.levels[i], view.durations[i]});
  return BangSequence(view.total, std::move(segs));
}

GridProtocol to_grid(const BangSequence& b, int segments) {
  if (segments < 2) throw std::invalid_argument("grid needs at least 2 segments");
  const double dt = b.t_f() / segments;
  std::vector<double> level_one(static_cast<std::size_t>(segments), 0.0);
  double t = 0.0;
  const auto& segs = b.segments();
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const double d = segs[k].duration;
    if (d > 0.0 && d < dt * (1.0 - 1e-9)) {
      throw std::invalid_argument("bang " + std::to_string(k) + " (duration " + fmt(d) +
                                  ") is shorter than one grid segment (" + fmt(dt) + ")");
    }
    const double start = t;
    const double end = (k + 1 == segs.size()) ? b.t_f() : t + d;
    t = end;
    if (segs[k].level != Level::Mixer || end <= start) continue;
    const int lo = std::clamp(static_cast<int>(std::floor(start / dt)), 0, segments - 1);
    const int hi = std::clamp(static_cast<int>(std::ceil(end / dt)), 0, segments);
    for (int i = lo; i < hi; ++i) {
      const double overlap = std::min(end, dt * (i + 1)) - std::max(start, dt * i);
      if (overlap > 0.0) level_one[static_cast<std::size_t>(i)] += overlap;
    }
  }
  for (auto& v : level_one) v = std::clamp(v / dt, 0.0, 1.0);
  // Rounding can leave 1 - 1e-16 on fully covered segments.
  for (auto& v : level_one) {
    if (std::abs(v - 1.0) < 1e-12) v = 1.0;
    if (std::abs(v) < 1e-12) v = 0.0;
  }
  return GridProtocol(b.t_f(), std::move(level_one));
}

BangSequence trotterize(const GridProtocol& g, int p) {
  if (p < 1) throw std::invalid_argument("trotterize needs p >= 1");
  const double window = g.t_f() / p;
  std::vector<double> beta(static_cast<std::size_t>(p)), gamma(static_cast<std::size_t>(p));
  for (int w = 0; w < p; ++w) {
    const double a = window * w;
    const double b = (w + 1 == p) ? g.t_f() : window * (w + 1);
    beta[static_cast<std::size_t>(w)] = grid_integral(g, a, b);
    gamma[static_cast<std::size_t>(w)] = (b - a) - beta[static_cast<std::size_t>(w)];
  }
  std::vector<double> d(static_cast<std::size_t>(2 * p));
  for (int w = 0; w < p; ++w) {
    const auto sw = static_cast<std::size_t>(w);
    d[2 * sw] = std::max(0.0, gamma[sw]);
    d[2 * sw + 1] = (w + 1 < p) ? 0.5 * (beta[sw] + beta[sw + 1]) : 0.5 * (beta[sw] + beta[0]);
  }
  // Absorb rounding so the durations sum to t_f exactly enough for the invariant.
  double sum = 0.0;
  for (double x : d) sum += x;
  d.back() = std::max(0.0, d.back() + (g.t_f() - sum));
  return BangSequence::from_durations(g.t_f(), d);
}

std::string protocol_csv(const GridProtocol& g) {
  std::string out = "t_start,t_end,u\n";
  for (int i = 0; i < g.segments(); ++i) {
    const double end = (i + 1 == g.segments()) ? g.t_f() : g.segment_start(i + 1);
    out += fmt(g.segment_start(i)) + "," + fmt(end) + "," + fmt(g[static_cast<std::size_t>(i)]) + "\n";
  }
  return out;
}

std::string protocol_csv(const BangSequence& b) {
  std::string out = "t_start,t_end,u\n";
  double t = 0.0;
  const auto& segs = b.segments();
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const double end = (k + 1 == segs.size()) ? b.t_f() : t + segs[k].duration;
    out += fmt(t) + "," + fmt(end) + "," + (segs[k].level == Level::Mixer ? "1" : "0") + "\n";
    t = end;
  }
  return out;
}

GridProtocol grid_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "t_start,t_end,u") {
    throw std::invalid_argument("protocol CSV must start with header 't_start,t_end,u'");
  }
  std::vector<double> samples;
  double t_end = 0.0;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    double a, b, u;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &b, &u) != 3) {
      throw std::invalid_argument("protocol CSV row " + std::to_string(row) + " is malformed");
    }
    samples.push_back(u);
    t_end = b;
  }
  return GridProtocol(t_end, std::move(samples));
}

nlohmann::json to_json(const BangSequence& b) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : b.segments()) segs.push_back({{"level", static_cast<int>(s.level)}, {"duration", s.duration}});
  return {{"schema", kBangSchema}, {"t_f", b.t_f()}, {"segments", segs}};
}

BangSequence bangs_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("schema", "") != kBangSchema) {
    throw std::invalid_argument(std::string("bang sequence document needs schema '") + kBangSchema + "'");
  }
  if (!doc.contains("t_f") || !doc.at("t_f").is_number()) throw std::invalid_argument("bang field 't_f' missing");
  if (!doc.contains("segments") || !doc.at("segments").is_array()) {
    throw std::invalid_argument("bang field 'segments' missing");
  }
  std::vector<Bang> segs;
  for (const auto& s : doc.at("segments")) {
    const int level = s.at("level").get<int>();
    if (level != 0 && level != 1) throw std::invalid_argument("bang field 'level' must be 0 or 1");
    segs.push_back({static_cast<Level>(level), s.at("duration").get<double>()});
  }
  return BangSequence(doc.at("t_f").get<double>(), std::move(segs));
}

}  // namespace qcontrol
