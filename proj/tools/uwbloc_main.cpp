#include <CLI11.hpp>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <initializer_list>
#include <iostream>
#include <json.hpp>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "uwbloc/config.hpp"
#include "uwbloc/errors.hpp"
#include "uwbloc/eval.hpp"
#include "uwbloc/log_io.hpp"
#include "uwbloc/replay.hpp"
#include "uwbloc/version.hpp"

namespace fs = std::filesystem;
using namespace uwbloc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct CommonOptions {
  std::string preset_name;
  std::string config_path;
  std::string anchors_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<double> gate;
  std::string q_form;
};

void add_config_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--preset", opt.preset_name,
                  "Built-in run configuration (hover, line, circle, "
                  "lissajous, table1-proxy)")
      ->envname("UWBLOC_PRESET");
  cmd->add_option("--config", opt.config_path,
                  "JSON run config; may be partial, applied over the preset. "
                  "Accepts a config.json or provenance.json from a prior run")
      ->envname("UWBLOC_CONFIG");
  cmd->add_option("--seed", opt.seed, "Master RNG seed")
      ->envname("UWBLOC_SEED");
  cmd->add_option("--duration", opt.duration,
                  "Trajectory duration, seconds");
}

void add_filter_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--q-form", opt.q_form,
                  "Process-noise form for the 6-state filter")
      ->check(CLI::IsMember({"paper", "standard"}));
  cmd->add_option("--gate", opt.gate,
                  "Innovation gate threshold in meters (applies to the "
                  "selected filter)");
}

void add_anchor_out_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--anchors", opt.anchors_path,
                  "Anchor coordinates file (`id x y z` per line)")
      ->envname("UWBLOC_ANCHORS");
  cmd->add_option("--out", opt.out_dir, "Output directory")
      ->envname("UWBLOC_OUT")
      ->required();
}

AnchorMap resolve_anchors(const CommonOptions& opt) {
  if (opt.anchors_path.empty()) return AnchorMap::standard();
  return AnchorMap::load(opt.anchors_path);
}

// Precedence: defaults < preset < config file < individual flags.
RunConfig resolve_config(const CommonOptions& opt, RunConfig base = {}) {
  RunConfig config = std::move(base);
  if (!opt.preset_name.empty()) config = preset(opt.preset_name);
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw ConfigError("cannot open config: " + opt.config_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    bool is_provenance = false;
    try {
      const auto probe = nlohmann::json::parse(text);
      is_provenance = probe.is_object() && probe.contains("tool") &&
                      probe.contains("config");
    } catch (const nlohmann::json::parse_error&) {
      // parse errors reported below with the file name
    }
    try {
      config = is_provenance ? provenance_from_json(text).config
                             : config_from_json(text, std::move(config));
    } catch (const ConfigError& e) {
      throw ConfigError(opt.config_path + ": " + e.what());
    }
  }
  if (opt.seed) config.seed = *opt.seed;
  if (opt.duration) config.trajectory.duration_s = *opt.duration;
  if (!opt.q_form.empty()) {
    config.vanilla.q_form =
        opt.q_form == "paper" ? QForm::kPaper : QForm::kStandard;
  }
  return config;
}

fs::path prepare_out_dir(const std::string& out) {
  const fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + out);
  return dir;
}

template <typename WriteFn>
void write_file(const fs::path& path, WriteFn&& fn) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  fn(out);
  if (!out) throw Error("write failed for " + path.string());
}

LogData load_log(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open log: " + path.string());
  return read_log(in);
}

Provenance require_provenance(const fs::path& artifact,
                              std::initializer_list<const char*> commands) {
  const fs::path pp = provenance_path_for(artifact);
  if (!fs::exists(pp)) {
    throw ConfigError("no provenance.json next to " + artifact.string() +
                      "; inputs must come from " + kToolName + " runs");
  }
  Provenance p = read_provenance(pp);
  for (const char* c : commands) {
    if (p.command == c) return p;
  }
  std::string wanted;
  for (const char* c : commands) {
    if (!wanted.empty()) wanted += "|";
    wanted += c;
  }
  throw ConfigError(pp.string() + ": expected output of `" + wanted +
                    "`, found `" + p.command + "`");
}

InputStamp log_stamp(const Provenance& log_prov) {
  return {"log", "", log_prov.config.seed, config_hash(log_prov.config)};
}

int run_simulate(const CommonOptions& opt) {
  const RunConfig config = resolve_config(opt);
  const AnchorMap anchors = resolve_anchors(opt);
  const SimRun run =
      simulate_run(config.trajectory, config.resolved_noise(), anchors);

  const fs::path dir = prepare_out_dir(opt.out_dir);
  write_file(dir / "log.jsonl", [&](std::ostream& o) { write_log(o, run); });
  write_file(dir / "config.json",
             [&](std::ostream& o) { o << config_to_json(config); });
  write_provenance(dir, {"simulate", config, {}});
  std::cout << "wrote " << (dir / "log.jsonl").string() << " ("
            << run.ranges.size() << " range, " << run.imu.samples.size()
            << " imu, " << run.truth.size() << " truth records)\n";
  return kExitOk;
}

int run_fuse(const fs::path& log_path, const std::string& filter,
             const CommonOptions& opt) {
  const Provenance log_prov =
      require_provenance(log_path, {"simulate", "compare"});
  const LogData log = load_log(log_path);
  CommonOptions merged = opt;
  merged.preset_name.clear();  // filter params inherit from the log's run
  RunConfig config = resolve_config(merged, log_prov.config);
  if (opt.gate) {
    config.vanilla.gate_threshold = *opt.gate;
    config.fusion.gate_threshold = *opt.gate;
  }

  const AnchorMap anchors = resolve_anchors(opt);
  const FilterKind kind =
      filter == "vanilla" ? FilterKind::kVanilla : FilterKind::kFusion;
  const EstimatesData estimates =
      replay(log, anchors, kind, config.vanilla, config.fusion);

  const fs::path dir = prepare_out_dir(opt.out_dir);
  write_file(dir / "estimates.jsonl",
             [&](std::ostream& o) { write_estimates(o, estimates); });
  Provenance prov{"fuse", config, {log_stamp(log_prov)}};
  prov.inputs.push_back({"filter", filter, config.seed, ""});
  write_provenance(dir, prov);
  std::cout << "wrote " << (dir / "estimates.jsonl").string() << " ("
            << estimates.estimates.size() << " estimates)\n";
  return kExitOk;
}

std::string estimator_name(const Provenance& prov) {
  for (const InputStamp& s : prov.inputs) {
    if (s.role == "filter") return s.name;
  }
  return "estimator";
}

void check_same_run(const Provenance& log_prov, const Provenance& est_prov,
                    const std::string& est_path) {
  const InputStamp expected = log_stamp(log_prov);
  for (const InputStamp& s : est_prov.inputs) {
    if (s.role != "log") continue;
    if (s.seed != expected.seed || s.hash != expected.hash) {
      throw ProvenanceMismatch(
          est_path + " was produced from a different run (seed " +
          std::to_string(s.seed) + ", config " + s.hash +
          ") than the log (seed " + std::to_string(expected.seed) +
          ", config " + expected.hash + ")");
    }
    return;
  }
  throw ProvenanceMismatch(est_path + " has no log stamp in its provenance");
}

void print_summary(const EvalReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "estimator" << std::right
      << std::setw(12) << "max_err_m" << std::setw(12) << "mean_err_m"
      << std::setw(12) << "latency_s" << std::setw(10) << "accepted"
      << std::setw(10) << "rejected" << "\n";
  out << std::fixed << std::setprecision(3);
  for (const EstimatorReport& r : report.estimators) {
    out << std::left << std::setw(12) << r.name << std::right << std::setw(12)
        << r.max_error << std::setw(12) << r.mean_error;
    if (r.latency_s) {
      out << std::setw(12) << *r.latency_s;
    } else {
      out << std::setw(12) << "n/a";
    }
    out << std::setw(10) << r.accepted << std::setw(10) << r.rejected << "\n";
  }
  std::cout << out.str();
}

void write_eval_outputs(const fs::path& dir, const LogData& log,
                        const std::vector<NamedEstimates>& named,
                        const EvalReport& report) {
  write_file(dir / "report.json",
             [&](std::ostream& o) { o << report_to_json(report); });
  write_file(dir / "metrics.csv",
             [&](std::ostream& o) { write_metrics_csv(o, report); });
  for (const NamedEstimates& n : named) {
    write_file(dir / ("timeseries_" + n.name + ".csv"), [&](std::ostream& o) {
      write_timeseries_csv(o, n.data.estimates, log.truth);
    });
  }
}

int run_eval(const fs::path& log_path,
             const std::vector<std::string>& estimate_paths,
             const CommonOptions& opt) {
  const Provenance log_prov =
      require_provenance(log_path, {"simulate", "compare"});
  const LogData log = load_log(log_path);

  std::vector<NamedEstimates> named;
  std::vector<InputStamp> stamps{log_stamp(log_prov)};
  for (const std::string& path : estimate_paths) {
    const Provenance est_prov = require_provenance(path, {"fuse"});
    check_same_run(log_prov, est_prov, path);
    std::ifstream in(path);
    if (!in) throw Error("cannot open estimates: " + path);
    std::string name = estimator_name(est_prov);
    for (const NamedEstimates& existing : named) {
      if (existing.name == name) name += "_2";
    }
    named.push_back({name, read_estimates(in)});
    stamps.push_back({"estimates", name, est_prov.config.seed,
                      config_hash(est_prov.config)});
  }

  const EvalReport report = evaluate(log, named, log_prov.config.eval_warmup_s);
  const fs::path dir = prepare_out_dir(opt.out_dir);
  write_eval_outputs(dir, log, named, report);
  write_provenance(dir, {"eval", log_prov.config, std::move(stamps)});
  print_summary(report);
  return kExitOk;
}

int run_compare(const CommonOptions& opt) {
  const RunConfig config = resolve_config(opt);
  const AnchorMap anchors = resolve_anchors(opt);
  const SimRun run =
      simulate_run(config.trajectory, config.resolved_noise(), anchors);

  std::stringstream log_stream;
  write_log(log_stream, run);
  const LogData log = read_log(log_stream);

  std::vector<NamedEstimates> named;
  named.push_back({"vanilla", replay(log, anchors, config.vanilla)});
  named.push_back({"fusion", replay(log, anchors, config.fusion)});
  const EvalReport report = evaluate(log, named, config.eval_warmup_s);

  const fs::path dir = prepare_out_dir(opt.out_dir);
  write_file(dir / "log.jsonl",
             [&](std::ostream& o) { o << log_stream.str(); });
  write_file(dir / "config.json",
             [&](std::ostream& o) { o << config_to_json(config); });
  for (const NamedEstimates& n : named) {
    write_file(dir / ("estimates_" + n.name + ".jsonl"),
               [&](std::ostream& o) { write_estimates(o, n.data); });
  }
  write_eval_outputs(dir, log, named, report);
  write_provenance(dir, {"compare", config, {}});
  print_summary(report);
  return kExitOk;
}

struct SweepRow {
  std::uint64_t seed = 0;
  EvalReport report;
};

int run_sweep(const CommonOptions& opt, int seeds, int jobs) {
  if (seeds < 1) throw ConfigError("--seeds must be >= 1");
  if (jobs < 1) throw ConfigError("--jobs must be >= 1");
  const RunConfig base = resolve_config(opt);
  const AnchorMap anchors = resolve_anchors(opt);

  std::vector<SweepRow> rows(static_cast<std::size_t>(seeds));
  std::mutex fail_mutex;
  std::exception_ptr failure;
  std::atomic<int> next{0};
  const auto worker = [&]() {
    for (int i = next.fetch_add(1); i < seeds; i = next.fetch_add(1)) {
      try {
        RunConfig config = base;
        config.seed = base.seed + static_cast<std::uint64_t>(i);
        const SimRun run = simulate_run(config.trajectory,
                                        config.resolved_noise(), anchors);
        LogData log;
        log.ranges = run.ranges;
        log.imu = run.imu.samples;
        log.truth.reserve(run.truth.size());
        for (const TruthSample& s : run.truth) {
          log.truth.push_back({s.t, s.position, s.velocity, Vec3::Zero()});
        }
        std::vector<NamedEstimates> named;
        named.push_back({"vanilla", replay(log, anchors, config.vanilla)});
        named.push_back({"fusion", replay(log, anchors, config.fusion)});
        rows[static_cast<std::size_t>(i)] = {
            config.seed, evaluate(log, named, config.eval_warmup_s)};
      } catch (...) {
        const std::lock_guard<std::mutex> lock(fail_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < std::min(jobs, seeds); ++j) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  const fs::path dir = prepare_out_dir(opt.out_dir);
  write_file(dir / "sweep.csv", [&](std::ostream& o) {
    o << "seed,estimator,max_error_m,mean_error_m,latency_s\n";
    for (const SweepRow& row : rows) {
      for (const EstimatorReport& r : row.report.estimators) {
        o << row.seed << ',' << r.name << ',' << r.max_error << ','
          << r.mean_error << ',';
        if (r.latency_s) o << *r.latency_s;
        o << '\n';
      }
    }
  });

  // Aggregate mean/std of the per-seed metrics.
  write_file(dir / "sweep_summary.json", [&](std::ostream& o) {
    o << "{\n";
    bool first_est = true;
    for (const std::string name : {"vanilla", "fusion"}) {
      std::vector<double> means, lats;
      for (const SweepRow& row : rows) {
        for (const EstimatorReport& r : row.report.estimators) {
          if (r.name != name) continue;
          means.push_back(r.mean_error);
          if (r.latency_s) lats.push_back(*r.latency_s);
        }
      }
      const auto stats = [](const std::vector<double>& v) {
        double m = 0.0, s = 0.0;
        for (double x : v) m += x;
        if (!v.empty()) m /= static_cast<double>(v.size());
        for (double x : v) s += (x - m) * (x - m);
        if (v.size() > 1) s = std::sqrt(s / static_cast<double>(v.size() - 1));
        return std::pair<double, double>(m, s);
      };
      const auto [em, es] = stats(means);
      const auto [lm, ls] = stats(lats);
      if (!first_est) o << ",\n";
      first_est = false;
      o << "  \"" << name << "\": {\"mean_error_m\": {\"mean\": " << em
        << ", \"std\": " << es << "}, \"latency_s\": {\"mean\": " << lm
        << ", \"std\": " << ls << "}}";
    }
    o << "\n}\n";
  });
  write_provenance(dir, {"sweep", base, {}});

  std::cout << "sweep over " << seeds << " seeds written to " << dir.string()
            << "\n";
  for (const SweepRow& row : rows) {
    std::cout << "seed " << row.seed << ":\n";
    print_summary(row.report);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kToolName) +
               " - UWB/IMU range-only localization toolkit"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
  app.require_subcommand(1);

  CommonOptions sim_opt, fuse_opt, eval_opt, cmp_opt, sweep_opt;
  std::string fuse_log, eval_log, fuse_filter;
  std::vector<std::string> eval_estimates;
  int sweep_seeds = 10, sweep_jobs = 1;

  auto* sim =
      app.add_subcommand("simulate", "Generate a deterministic sensor log");
  add_config_flags(sim, sim_opt);
  add_anchor_out_flags(sim, sim_opt);

  auto* fuse = app.add_subcommand("fuse", "Replay a log through a filter");
  fuse->add_option("--log", fuse_log, "Input log.jsonl")->required();
  fuse->add_option("--filter", fuse_filter, "Estimator to run")
      ->required()
      ->check(CLI::IsMember({"vanilla", "fusion"}));
  fuse->add_option("--config", fuse_opt.config_path,
                   "Partial JSON config overriding the log's filter settings");
  add_filter_flags(fuse, fuse_opt);
  add_anchor_out_flags(fuse, fuse_opt);

  auto* ev =
      app.add_subcommand("eval", "Score estimate files against a log's truth");
  ev->add_option("--log", eval_log, "Input log.jsonl")->required();
  ev->add_option("--estimates", eval_estimates,
                 "estimates.jsonl files (repeatable)")
      ->required();
  add_anchor_out_flags(ev, eval_opt);

  auto* cmp = app.add_subcommand("compare",
                                 "One-shot simulate + both filters + report");
  add_config_flags(cmp, cmp_opt);
  add_filter_flags(cmp, cmp_opt);
  add_anchor_out_flags(cmp, cmp_opt);

  auto* sweep =
      app.add_subcommand("sweep", "Repeat compare over consecutive seeds");
  add_config_flags(sweep, sweep_opt);
  sweep->add_option("--seeds", sweep_seeds, "Number of consecutive seeds");
  sweep->add_option("--jobs", sweep_jobs, "Parallel runs")
      ->envname("UWBLOC_JOBS");
  add_anchor_out_flags(sweep, sweep_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (sim->parsed()) return run_simulate(sim_opt);
    if (fuse->parsed()) return run_fuse(fuse_log, fuse_filter, fuse_opt);
    if (ev->parsed()) return run_eval(eval_log, eval_estimates, eval_opt);
    if (cmp->parsed()) return run_compare(cmp_opt);
    if (sweep->parsed()) return run_sweep(sweep_opt, sweep_seeds, sweep_jobs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const EnvelopeViolation& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ProvenanceMismatch& e) {
    std::cerr << "provenance mismatch: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
