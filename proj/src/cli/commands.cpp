#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "cli/manifest.hpp"
#include "qcontrol/analysis.hpp"
#include "qcontrol/instance.hpp"
#include "qcontrol/optimize.hpp"
#include "qcontrol/tables.hpp"

namespace qcontrol::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct GdFlags {
  double t_f = 2.0;
  int segments = kDefaultGridSegments;
  int max_iters = 50000;
  double step = 1.0;
  double stop_tol = 1e-6;
  int restarts = 1;
  std::string init = "const";
  double u0 = 0.5;
  std::string init_file;
  std::uint64_t seed = 0;
  double eps_u = kDefaultEpsU;
  double eps_phi = 0.0;
  std::string method = "taylor";
};

void add_gd_flags(CLI::App* cmd, GdFlags& f, bool with_tf) {
  if (with_tf) cmd->add_option("--tf", f.t_f, "Total time t_f")->capture_default_str();
  cmd->add_option("--segments,-M", f.segments, "Grid segments M")->capture_default_str();
  cmd->add_option("--max-iters", f.max_iters, "Iteration cap")->capture_default_str();
  cmd->add_option("--step", f.step, "Initial step size (halved on failed descent)")->capture_default_str();
  cmd->add_option("--stop-tol", f.stop_tol, "Stop when max |projected gradient| <= tol")->capture_default_str();
  cmd->add_option("--restarts", f.restarts, "Number of starts; extra starts are random")->capture_default_str();
  cmd->add_option("--init", f.init, "Initial protocol")
      ->check(CLI::IsMember({"const", "random", "file"}))
      ->capture_default_str();
  cmd->add_option("--u0", f.u0, "Constant initial control")->capture_default_str();
  cmd->add_option("--init-file", f.init_file, "Protocol CSV for --init file");
  cmd->add_option("--seed", f.seed, "Seed for random starts")->capture_default_str();
  cmd->add_option("--eps-u", f.eps_u, "Bang tolerance on u")->capture_default_str();
  cmd->add_option("--eps-phi", f.eps_phi, "Switching-function tolerance (default 10 * stop-tol)");
  cmd->add_option("--method", f.method, "Propagator")
      ->check(CLI::IsMember({"taylor", "strang", "dense"}))
      ->capture_default_str();
}

PropagationConfig propagation_from(const std::string& method) {
  PropagationConfig p;
  if (method == "strang") p.method = PropagationMethod::StrangSplit;
  if (method == "dense") p.method = PropagationMethod::DenseExpm;
  return p;
}

GdConfig gd_config_from(const GdFlags& f, int workers) {
  GdConfig cfg;
  cfg.max_iters = f.max_iters;
  cfg.step_size = f.step;
  cfg.stop_tol = f.stop_tol;
  cfg.restarts = f.restarts;
  cfg.seed = f.seed;
  cfg.workers = workers;
  cfg.propagation = propagation_from(f.method);
  if (f.init == "const") {
    cfg.init = {GdInitKind::Constant, f.u0, 0, {}};
  } else if (f.init == "random") {
    cfg.init = {GdInitKind::Random, 0.5, f.seed, {}};
  } else {
    if (f.init_file.empty()) throw UsageError("--init file needs --init-file");
    const GridProtocol g = grid_from_csv(read_text(f.init_file));
    cfg.init = {GdInitKind::Provided, 0.5, 0, g.samples()};
  }
  validate(cfg);
  return cfg;
}

double eps_phi_of(const GdFlags& f) { return f.eps_phi > 0.0 ? f.eps_phi : 10.0 * f.stop_tol; }

ojson gd_config_json(const GdFlags& f) {
  return {{"t_f", f.t_f},           {"segments", f.segments}, {"max_iters", f.max_iters}, {"step_size", f.step},
          {"stop_tol", f.stop_tol}, {"restarts", f.restarts}, {"init", f.init},           {"u0", f.u0},
          {"init_file", f.init_file}, {"seed", f.seed},       {"eps_u", f.eps_u},         {"eps_phi", eps_phi_of(f)},
          {"method", f.method}};
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError("cannot parse '" + item + "' as a number");
    }
    if (used != item.size()) throw UsageError("cannot parse '" + item + "' as a number");
    out.push_back(v);
  }
  return out;
}

struct Run {
  fs::path dir;
  RunManifest manifest;
};

Run start_run(const std::string& command, const std::vector<std::string>& args, const std::string& out_dir) {
  if (out_dir.empty()) throw UsageError("--out is required");
  Run r{out_dir, {}};
  fs::create_directories(r.dir);
  r.manifest.command = command;
  r.manifest.argv = args;
  r.manifest.started_at = utc_now();
  return r;
}

void attach_instance(RunManifest& m, const ProblemInstance& inst, const std::string& path) {
  m.instance = ojson::parse(to_canonical_text(inst));
  m.instance_path = path;
  m.seeds["instance"] = inst.seed;
}

void write_output(Run& r, const std::string& name, const std::string& text) {
  write_text_atomic(r.dir / name, text);
  if (std::find(r.manifest.outputs.begin(), r.manifest.outputs.end(), name) == r.manifest.outputs.end()) {
    r.manifest.outputs.push_back(name);
  }
}

Family family_from_flag(const std::string& name, InstanceParams& params) {
  static const std::map<std::string, Family> aliases = {
      {"maxcut4", Family::MaxCutRegular},       {"maxcut", Family::MaxCutRegular},
      {"maxcut_regular", Family::MaxCutRegular}, {"random-ising", Family::RandomIsing},
      {"random_ising", Family::RandomIsing},     {"long-range", Family::LongRangeIsing},
      {"long_range_ising", Family::LongRangeIsing}, {"heisenberg", Family::Heisenberg}};
  const auto it = aliases.find(name);
  if (it == aliases.end()) throw UsageError("unknown family '" + name + "'");
  if (name == "maxcut4") params.degree = 4;
  return it->second;
}

// Runs `compute(i)` for i in [0, n) on `workers` threads and appends rows to
// the CSV in index order as soon as a prefix is complete. Returns the first
// error message, or empty.
template <class Row>
std::string run_rows(std::size_t n, int workers, const std::function<Row(std::size_t)>& compute, CsvWriter& csv) {
  std::vector<std::optional<Row>> done(n);
  std::vector<bool> failed(n, false);
  std::mutex mu;
  std::size_t next_write = 0;
  std::string first_error;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  auto flush_prefix = [&] {
    while (next_write < n && (done[next_write] || failed[next_write])) {
      if (done[next_write]) csv.row(csv_fields(*done[next_write]));
      ++next_write;
    }
  };
  auto worker = [&] {
    for (std::size_t i; !stop && (i = next.fetch_add(1)) < n;) {
      try {
        Row row = compute(i);
        std::lock_guard lock(mu);
        done[i] = std::move(row);
        flush_prefix();
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        failed[i] = true;
        if (first_error.empty()) first_error = "row " + std::to_string(i) + ": " + e.what();
        stop = true;
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::clamp<std::size_t>(static_cast<std::size_t>(workers), 1, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  // Rows finished after a failure still go out, in index order.
  for (std::size_t i = next_write; i < n; ++i) {
    if (done[i]) csv.row(csv_fields(*done[i]));
  }
  return first_error;
}

int cmd_generate(const std::string& family_name, int n, std::uint64_t seed, int degree, double alpha,
                 std::string out_path, std::ostream& out) {
  InstanceParams params{degree, alpha};
  const Family family = family_from_flag(family_name, params);
  const ProblemInstance inst = generate(family, n, params, seed);
  if (out_path.empty()) {
    out_path = to_string(family) + "_n" + std::to_string(n) + "_s" + std::to_string(seed) + ".instance.json";
  }
  const fs::path p(out_path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_text_atomic(p, to_canonical_text(inst));
  out << p.string() << "\n";
  return kSuccess;
}

int cmd_optimize_gd(const std::vector<std::string>& args, const std::string& instance_path, const GdFlags& f,
                    int workers, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const ProblemInstance inst = load_instance(instance_path);
  const GdConfig cfg = gd_config_from(f, workers);
  Run run = start_run("optimize-gd", args, out_dir);
  attach_instance(run.manifest, inst, instance_path);
  run.manifest.config = gd_config_json(f);
  run.manifest.config["workers"] = workers;
  run.manifest.seeds["optimizer"] = f.seed;

  const ControlProblem problem = ControlProblem::from_instance(inst);
  std::optional<GdResult> result;
  try {
    result = gd_optimize(problem, f.t_f, f.segments, cfg);
  } catch (const OptimizationDiverged& e) {
    write_output(run, "trace.csv", trace_csv(e.trace()));
    run.manifest.status = "failed";
    run.manifest.error = e.what();
    write_manifest(run.dir, run.manifest);
    err << "optimize-gd: " << e.what() << "\n";
    return kNumerical;
  }
  const GdResult& r = *result;
  const ProtocolStructure s = detect_structure(r.protocol, r.sweep, f.eps_u, eps_phi_of(f), &problem);

  write_output(run, "protocol.csv", protocol_csv(r.protocol));
  write_output(run, "phi.csv", sweep_csv(r.sweep, r.protocol));
  write_output(run, "trace.csv", trace_csv(r.trace));
  write_output(run, "structure.json", to_json(s).dump(2) + "\n");

  ojson starts = ojson::array();
  for (const auto& st : r.starts) starts.push_back({{"J", st.J}, {"converged", st.converged}, {"iterations", st.iterations}});
  run.manifest.result = {{"J", r.sweep.cost_J},
                         {"converged", r.converged},
                         {"iterations", r.iterations},
                         {"residual", r.residual},
                         {"hbb_median", median(r.sweep.hbb)},
                         {"hbb_relative_spread", relative_spread(r.sweep.hbb)},
                         {"initial_bang", s.initial_bang_length},
                         {"final_bang", s.final_bang_length},
                         {"flagged_segments", s.flagged.size()},
                         {"best_start", r.best_start},
                         {"starts", starts}};
  write_manifest(run.dir, run.manifest);
  out << "J = " << format_double(r.sweep.cost_J) << (r.converged ? " (converged" : " (not converged")
      << " after " << r.iterations << " iterations)\n";
  return kSuccess;
}

struct QaoaFlags {
  int p = 1;
  double t_f = 2.0;
  std::string init = "equal";
  std::string from;
  int max_iters = 50000;
  double stop_tol = 1e-6;
  double step = 1.0;
  std::string method = "taylor";
};

QaoaConfig qaoa_config_from(const QaoaFlags& f) {
  QaoaConfig cfg;
  cfg.p = f.p;
  cfg.t_f = f.t_f;
  cfg.max_iters = f.max_iters;
  cfg.stop_tol = f.stop_tol;
  cfg.step_size = f.step;
  cfg.propagation = propagation_from(f.method);
  if (f.init == "trotter") {
    if (f.from.empty()) throw UsageError("--init trotter needs --from <protocol.csv>");
    cfg.init = QaoaInitKind::Trotter;
    cfg.trotter_source = grid_from_csv(read_text(f.from));
  } else if (f.init == "file") {
    if (f.from.empty()) throw UsageError("--init file needs --from <bangs.json>");
    cfg.init = QaoaInitKind::Provided;
    cfg.provided = bangs_from_json(nlohmann::json::parse(read_text(f.from)));
  }
  validate(cfg);
  return cfg;
}

int cmd_optimize_qaoa(const std::vector<std::string>& args, const std::string& instance_path, const QaoaFlags& f,
                      const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const QaoaConfig cfg = qaoa_config_from(f);
  const ProblemInstance inst = load_instance(instance_path);
  Run run = start_run("optimize-qaoa", args, out_dir);
  attach_instance(run.manifest, inst, instance_path);
  run.manifest.config = {{"p", f.p},           {"t_f", f.t_f},   {"init", f.init},         {"from", f.from},
                         {"max_iters", f.max_iters}, {"stop_tol", f.stop_tol}, {"step_size", f.step},
                         {"method", f.method}};

  std::optional<QaoaResult> result;
  try {
    result = qaoa_optimize(inst, cfg);
  } catch (const OptimizationDiverged& e) {
    write_output(run, "trace.csv", trace_csv(e.trace()));
    run.manifest.status = "failed";
    run.manifest.error = e.what();
    write_manifest(run.dir, run.manifest);
    err << "optimize-qaoa: " << e.what() << "\n";
    return kNumerical;
  }
  const QaoaResult& r = *result;
  nlohmann::json bangs = to_json(r.bangs);
  bangs["energy"] = r.energy;
  bangs["kkt_residual"] = r.kkt_residual;
  bangs["converged"] = r.converged;
  write_output(run, "bangs.json", bangs.dump(2) + "\n");
  write_output(run, "protocol.csv", protocol_csv(r.bangs));
  write_output(run, "trace.csv", trace_csv(r.trace));
  run.manifest.result = {{"energy", r.energy},
                         {"converged", r.converged},
                         {"iterations", r.iterations},
                         {"kkt_residual", r.kkt_residual}};
  write_manifest(run.dir, run.manifest);
  out << "E = " << format_double(r.energy) << (r.converged ? " (converged" : " (not converged") << " after "
      << r.iterations << " iterations)\n";
  return kSuccess;
}

struct SweepFlags {
  std::string kind;
  std::string tf_list;
  double tf_min = 0.0, tf_max = 0.0;
  int tf_count = 0;
  std::string p_list;
  int p_min = 0, p_max = 0, p_step = 1;
  int qaoa_max_iters = 50000;
  double qaoa_stop_tol = 1e-6;
  double h_tol = 1e-3;
};

std::vector<double> tf_values(const SweepFlags& s) {
  if (!s.tf_list.empty()) return parse_list(s.tf_list);
  std::vector<double> v;
  if (s.tf_count == 1) v.push_back(s.tf_min);
  for (int i = 0; s.tf_count > 1 && i < s.tf_count; ++i) {
    v.push_back(s.tf_min + (s.tf_max - s.tf_min) * i / (s.tf_count - 1));
  }
  return v;
}

std::vector<int> p_values(const SweepFlags& s) {
  std::vector<int> v;
  if (!s.p_list.empty()) {
    for (double x : parse_list(s.p_list)) {
      if (x != std::floor(x)) throw UsageError("p values must be integers");
      v.push_back(static_cast<int>(x));
    }
    return v;
  }
  if (s.p_step < 1) throw UsageError("--p-step must be >= 1");
  for (int p = s.p_min; s.p_min >= 1 && p <= s.p_max; p += s.p_step) v.push_back(p);
  return v;
}

int cmd_sweep(const std::vector<std::string>& args, const std::string& instance_path, const SweepFlags& s,
              const GdFlags& f, int workers, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const ProblemInstance inst = load_instance(instance_path);
  GdConfig cfg = gd_config_from(f, 1);
  const ControlProblem problem = ControlProblem::from_instance(inst);

  std::vector<double> tfs;
  std::vector<int> ps;
  if (s.kind == "pscaling") {
    ps = p_values(s);
    if (ps.empty()) throw UsageError("empty p range");
    for (int p : ps) {
      if (p < 1) throw UsageError("p values must be >= 1");
    }
  } else {
    tfs = tf_values(s);
    if (tfs.empty()) throw UsageError("empty t_f range");
    for (double t : tfs) {
      if (!(t > 0.0)) throw UsageError("t_f values must be > 0");
    }
  }

  Run run = start_run("sweep", args, out_dir);
  attach_instance(run.manifest, inst, instance_path);
  run.manifest.config = gd_config_json(f);
  run.manifest.config["kind"] = s.kind;
  run.manifest.config["workers"] = workers;
  run.manifest.seeds["optimizer"] = f.seed;

  std::string error;
  const double eps_phi = eps_phi_of(f);
  if (s.kind == "pscaling") {
    run.manifest.config["p"] = ps;
    run.manifest.config["qaoa_max_iters"] = s.qaoa_max_iters;
    run.manifest.config["qaoa_stop_tol"] = s.qaoa_stop_tol;
    cfg.workers = workers;
    std::optional<GdResult> base;
    try {
      base = gd_optimize(problem, f.t_f, f.segments, cfg);
    } catch (const OptimizationDiverged& e) {
      error = std::string("gd baseline: ") + e.what();
    }
    if (error.empty()) {
      write_output(run, "protocol.csv", protocol_csv(base->protocol));
      run.manifest.result["e_gd"] = base->sweep.cost_J;
      run.manifest.result["gd_converged"] = base->converged;
      QaoaConfig qc;
      qc.max_iters = s.qaoa_max_iters;
      qc.stop_tol = s.qaoa_stop_tol;
      qc.propagation = cfg.propagation;
      CsvWriter csv(run.dir / "sweep.csv", kPScalingCsv.header);
      run.manifest.outputs.push_back("sweep.csv");
      std::function<PScalingRow(std::size_t)> compute = [&](std::size_t i) {
        return pscaling_point(problem, base->protocol, base->sweep.cost_J, ps[i], qc);
      };
      error = run_rows(ps.size(), workers, compute, csv);
    }
  } else if (s.kind == "lambda") {
    run.manifest.config["t_f_values"] = tfs;
    run.manifest.config["h_tol"] = s.h_tol;
    CsvWriter csv(run.dir / "sweep.csv", kLambdaCsv.header);
    run.manifest.outputs.push_back("sweep.csv");
    std::function<LambdaRow(std::size_t)> compute = [&](std::size_t i) {
      return lambda_point(problem, tfs[i], f.segments, cfg, s.h_tol);
    };
    error = run_rows(tfs.size(), workers, compute, csv);
  } else {
    run.manifest.config["t_f_values"] = tfs;
    CsvWriter csv(run.dir / "sweep.csv", kBangLenCsv.header);
    run.manifest.outputs.push_back("sweep.csv");
    std::function<BangLengthRow(std::size_t)> compute = [&](std::size_t i) {
      return bang_length_point(problem, tfs[i], f.segments, cfg, eps_phi);
    };
    error = run_rows(tfs.size(), workers, compute, csv);
    if (error.empty()) {
      const CsvTable t = read_csv_file(run.dir / "sweep.csv");
      std::vector<double> x, a, b;
      for (const auto& row : t.rows) {
        x.push_back(std::stod(row[0]));
        a.push_back(std::stod(row[1]));
        b.push_back(std::stod(row[2]));
      }
      const double ra = spearman(x, a), rb = spearman(x, b);
      run.manifest.result["spearman_initial"] = std::isnan(ra) ? ojson(nullptr) : ojson(ra);
      run.manifest.result["spearman_final"] = std::isnan(rb) ? ojson(nullptr) : ojson(rb);
    }
  }

  if (!error.empty()) {
    run.manifest.status = "failed";
    run.manifest.error = error;
    write_manifest(run.dir, run.manifest);
    err << "sweep: " << error << "\n";
    return kNumerical;
  }
  write_manifest(run.dir, run.manifest);
  out << (run.dir / "sweep.csv").string() << "\n";
  return kSuccess;
}

int cmd_check_schema(const std::string& dir, std::ostream& out, std::ostream& err) {
  const auto problems = check_run_directory(dir);
  for (const auto& p : problems) err << p << "\n";
  if (!problems.empty()) return kUsage;
  out << dir << ": ok\n";
  return kSuccess;
}

int cmd_replay(const std::string& manifest_path, std::string out_dir, std::ostream& out, std::ostream& err) {
  const RunManifest m = read_manifest(manifest_path);
  if (out_dir.empty()) out_dir = (fs::path(manifest_path).parent_path() / "replay").string();
  fs::create_directories(out_dir);
  std::vector<std::string> args = m.argv;
  auto replace_flag = [&](const std::string& flag, const std::string& value) {
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] == flag) {
        args[i + 1] = value;
        return;
      }
      if (args[i].rfind(flag + "=", 0) == 0) {
        args[i] = flag + "=" + value;
        return;
      }
    }
    args.push_back(flag);
    args.push_back(value);
  };
  if (!m.instance.is_null()) {
    const fs::path inst_path = fs::path(out_dir) / "replay.instance.json";
    write_text_atomic(inst_path, m.instance.dump(2) + "\n");
    replace_flag("--instance", inst_path.string());
  }
  replace_flag("--out", out_dir);
  return run(args, out, err);
}

}  // namespace

int default_workers() {
  const char* env = std::getenv("QCONTROL_WORKERS");
  if (!env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) return 1;
  return static_cast<int>(std::min<long>(v, 256));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal control protocols for H(t) = u(t) B + (1 - u(t)) C", "qcontrol"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string family, gen_out;
  int n = 0, degree = 4;
  std::uint64_t seed = 0;
  double alpha = 1.0;
  auto* gen = app.add_subcommand("generate", "Draw a problem instance");
  gen->add_option("--family", family, "maxcut4 | maxcut | random-ising | long-range | heisenberg")->required();
  gen->add_option("--n", n, "Number of spins")->required();
  gen->add_option("--seed", seed, "Instance seed")->capture_default_str();
  gen->add_option("--degree", degree, "Graph degree (maxcut, heisenberg)")->capture_default_str();
  gen->add_option("--alpha", alpha, "Power-law exponent (long-range)")->capture_default_str();
  gen->add_option("--out", gen_out, "Output path (default <family>_n<N>_s<seed>.instance.json)");

  int workers = default_workers();
  std::string instance, out_dir;
  GdFlags gd;
  auto* ogd = app.add_subcommand("optimize-gd", "Accelerated projected gradient over a grid protocol");
  ogd->add_option("--instance", instance, "Instance file")->required();
  ogd->add_option("--out", out_dir, "Run directory")->required();
  ogd->add_option("--workers", workers, "Threads for restarts (env QCONTROL_WORKERS)")->capture_default_str();
  add_gd_flags(ogd, gd, true);

  QaoaFlags qf;
  auto* oq = app.add_subcommand("optimize-qaoa", "Optimize 2p bang durations at fixed t_f");
  oq->add_option("--instance", instance, "Instance file")->required();
  oq->add_option("--out", out_dir, "Run directory")->required();
  oq->add_option("--p", qf.p, "Number of C/B pairs")->required();
  oq->add_option("--tf", qf.t_f, "Total time t_f")->capture_default_str();
  oq->add_option("--init", qf.init, "equal | trotter | file")
      ->check(CLI::IsMember({"equal", "trotter", "file"}))
      ->capture_default_str();
  oq->add_option("--from", qf.from, "protocol.csv for trotter, bangs.json for file");
  oq->add_option("--max-iters", qf.max_iters, "Iteration cap")->capture_default_str();
  oq->add_option("--stop-tol", qf.stop_tol, "KKT residual tolerance")->capture_default_str();
  oq->add_option("--step", qf.step, "Initial step size")->capture_default_str();
  oq->add_option("--method", qf.method, "Propagator")
      ->check(CLI::IsMember({"taylor", "strang", "dense"}))
      ->capture_default_str();

  SweepFlags sf;
  GdFlags sgd;
  auto* sw = app.add_subcommand("sweep", "Tables over p or t_f");
  sw->add_option("--kind", sf.kind, "pscaling | lambda | banglen")
      ->required()
      ->check(CLI::IsMember({"pscaling", "lambda", "banglen"}));
  sw->add_option("--instance", instance, "Instance file")->required();
  sw->add_option("--out", out_dir, "Run directory")->required();
  sw->add_option("--workers", workers, "Parallel sweep points (env QCONTROL_WORKERS)")->capture_default_str();
  sw->add_option("--tf", sgd.t_f, "t_f for pscaling")->capture_default_str();
  sw->add_option("--tf-list", sf.tf_list, "Comma-separated t_f values");
  sw->add_option("--tf-min", sf.tf_min, "First t_f");
  sw->add_option("--tf-max", sf.tf_max, "Last t_f");
  sw->add_option("--tf-count", sf.tf_count, "Number of t_f values");
  sw->add_option("--p-list", sf.p_list, "Comma-separated p values");
  sw->add_option("--p-min", sf.p_min, "First p");
  sw->add_option("--p-max", sf.p_max, "Last p");
  sw->add_option("--p-step", sf.p_step, "p increment")->capture_default_str();
  sw->add_option("--qaoa-max-iters", sf.qaoa_max_iters, "QAOA iteration cap")->capture_default_str();
  sw->add_option("--qaoa-stop-tol", sf.qaoa_stop_tol, "QAOA KKT tolerance")->capture_default_str();
  sw->add_option("--h-tol", sf.h_tol, "|H| below which a t_f counts as unconstrained")->capture_default_str();
  add_gd_flags(sw, sgd, false);

  std::string check_dir;
  auto* chk = app.add_subcommand("check-schema", "Validate the files of a run directory");
  chk->add_option("dir", check_dir, "Run directory")->required();

  std::string manifest_path, replay_out;
  auto* rep = app.add_subcommand("replay", "Rerun a command from its manifest");
  rep->add_option("manifest", manifest_path, "manifest.json")->required();
  rep->add_option("--out", replay_out, "Run directory (default <manifest dir>/replay)");

  std::vector<const char*> argv{"qcontrol"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(family, n, seed, degree, alpha, gen_out, out);
    if (workers < 1) throw UsageError("--workers must be >= 1");
    if (ogd->parsed()) return cmd_optimize_gd(args, instance, gd, workers, out_dir, out, err);
    if (oq->parsed()) return cmd_optimize_qaoa(args, instance, qf, out_dir, out, err);
    if (sw->parsed()) return cmd_sweep(args, instance, sf, sgd, workers, out_dir, out, err);
    if (chk->parsed()) return cmd_check_schema(check_dir, out, err);
    if (rep->parsed()) return cmd_replay(manifest_path, replay_out, out, err);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON input: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}

}  // namespace qcontrol::cli
