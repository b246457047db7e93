#include "gps_cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "gps/trace_io.hpp"
#include "gps/version.hpp"

namespace gps::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void Log::info(const std::string& msg) const {
  if (verbose_) {
    err_ << "[gps] " << msg << '\n';
  }
}

void Log::warn(const std::string& msg) const { err_ << "[gps] WARNING: " << msg << '\n'; }

namespace {

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream os(dir / name, std::ios::binary);
  if (!os) {
    throw std::runtime_error("cannot write " + (dir / name).string());
  }
  return os;
}

std::string seed_line(const RunConfig& rc) {
  return "seed " + std::to_string(rc.seed) + (rc.seed_override ? " (GPS_SEED_OVERRIDE)" : "");
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void warn_criticality(const RunConfig& rc, const Log& log) {
  if (!rc.critical) {
    return;
  }
  for (const auto& w : criticality_warnings(rc.sim.arrivals.rate(), rc.sim.service)) {
    log.warn(w);
  }
}

}  // namespace

std::vector<std::string> provenance_header(const RunConfig& rc) {
  return {std::string("gps ") + kVersion, "config " + rc.hash, seed_line(rc)};
}

int cmd_simulate(const RunConfig& rc, const Options& opt, const Log& log) {
  if (!(rc.sim.horizon > 0.0)) {
    throw SchemaError("config: simulate needs 'horizon'");
  }
  for (double t : rc.grid) {
    if (t > rc.sim.horizon) {
      throw SchemaError("grid: point " + io::format_number(t) + " lies beyond the horizon");
    }
  }
  warn_criticality(rc, log);
  SimConfig sim = rc.sim;
  sim.snapshot_grid = rc.grid;
  Trace trace;
  try {
    trace = run(sim);
  } catch (const std::exception& e) {
    log.warn("simulation failed (seed " + std::to_string(rc.seed) + "): " + e.what());
    return kRuntimeError;
  }
  log.info("simulated " + std::to_string(trace.jobs().size()) + " jobs in " + std::to_string(trace.batches().size()) +
           " batches");

  auto header = provenance_header(rc);
  header.push_back("horizon " + io::format_number(rc.sim.horizon));
  auto jobs = open_output(opt.out, "jobs.csv");
  io::write_jobs_csv(jobs, trace, header);
  auto batches = open_output(opt.out, "batches.csv");
  io::write_batches_csv(batches, trace, header);
  auto snaps = open_output(opt.out, "snapshots.csv");
  io::write_snapshots_csv(snaps, trace.snapshots(), header);
  log.info("wrote jobs.csv, batches.csv, snapshots.csv to " + opt.out.string());
  return kOk;
}

int cmd_fluid(const RunConfig& rc, const Options& opt, const Log& log) {
  if (!rc.fluid) {
    throw SchemaError("config: fluid needs a 'fluid' block or arrivals/service/initial to derive one");
  }
  if (rc.grid.empty()) {
    throw SchemaError("config: fluid needs 'grid'");
  }
  for (const auto& note : rc.fluid->validation_notes()) {
    log.warn(note);
  }
  std::vector<TestFunction> probes;
  if (rc.source.contains("test_set")) {
    probes = rc.tests.functions();
  }
  auto os = open_output(opt.out, "fluid.csv");
  io::write_fluid_csv(os, *rc.fluid, rc.grid, probes, provenance_header(rc));
  log.info("wrote fluid.csv (" + std::to_string(rc.grid.size()) + " rows) to " + opt.out.string());
  return kOk;
}

ordered_json report_json(const ConvergenceReport& report, const RunConfig& rc, const CheckResult& check,
                         const Timing& timing) {
  ordered_json j;
  j["tool"] = "gps";
  j["version"] = kVersion;
  j["config_hash"] = rc.hash;
  j["seed"] = rc.seed;
  j["seed_override"] = rc.seed_override.has_value();
  j["config"] = rc.source;
  j["fluid_workload"] = report.fluid_workload;
  j["exclusion_radius"] = report.exclusion_radius;
  j["kept_times"] = report.kept_times;
  j["excluded_times"] = report.excluded_times;
  j["test_set"] = report.test_tags;

  ordered_json scales = ordered_json::array();
  for (const auto& s : report.scales) {
    ordered_json row;
    row["r"] = s.r;
    row["D"] = s.aggregate;
    row["workload_sup_error"] = s.workload_sup_error;
    row["workload_sup_error_max"] = s.workload_sup_error_max;
    row["simulated_jobs"] = s.simulated_jobs;
    row["seeds"] = s.seeds;
    scales.push_back(std::move(row));
  }
  j["scales"] = std::move(scales);

  // One table per scale: t -> tag -> [mean, max].
  ordered_json tables = ordered_json::array();
  for (const auto& s : report.scales) {
    ordered_json table;
    table["r"] = s.r;
    ordered_json rows = ordered_json::array();
    for (double t : report.kept_times) {
      ordered_json row;
      row["t"] = t;
      ordered_json errs;
      for (const auto& c : report.cells) {
        if (c.r == s.r && c.t == t) {
          errs[c.tag] = {{"mean_abs_err", c.mean_abs}, {"max_abs_err", c.max_abs}};
        }
      }
      row["errors"] = std::move(errs);
      rows.push_back(std::move(row));
    }
    table["rows"] = std::move(rows);
    tables.push_back(std::move(table));
  }
  j["tables"] = std::move(tables);
  j["check"] = {{"passed", check.passed},
                {"required_ratio", rc.rule.required_ratio},
                {"monotone_slack", rc.rule.monotone_slack},
                {"workload_bound", rc.rule.workload_bound ? ordered_json(*rc.rule.workload_bound) : ordered_json()},
                {"narrative", check.narrative}};
  j["notes"] = report.notes;
  j["timing"] = {{"started_at", timing.started_at}, {"wall_clock_seconds", timing.wall_clock_seconds}};
  return j;
}

int finish_converge(const ConvergenceReport& report, const RunConfig& rc, const fs::path& out, const Timing& timing,
                    const Log& log) {
  const CheckResult check = check_convergence(report, rc.rule);
  {
    auto os = open_output(out, "report.json");
    os << report_json(report, rc, check, timing).dump(2) << '\n';
  }
  {
    auto os = open_output(out, "convergence.csv");
    for (const auto& line : provenance_header(rc)) {
      os << "# " << line << '\n';
    }
    os << "r,t,f_tag,mean_abs_err,max_abs_err\n";
    for (const auto& c : report.cells) {
      os << io::format_number(c.r) << ',' << io::format_number(c.t) << ',' << c.tag << ','
         << io::format_number(c.mean_abs) << ',' << io::format_number(c.max_abs) << '\n';
    }
  }
  std::istringstream narrative(check.narrative);
  for (std::string line; std::getline(narrative, line);) {
    if (check.passed) {
      log.info(line);
    } else {
      log.warn(line);
    }
  }
  return check.passed ? kOk : kCheckFailed;
}

int cmd_converge(const RunConfig& rc, const Options& opt, const Log& log) {
  if (!rc.scaling) {
    throw SchemaError("config: converge needs 'scales'");
  }
  if (rc.scaling->scales.size() < 2) {
    throw SchemaError("scales: the convergence check needs at least two scales");
  }
  warn_criticality(rc, log);
  ScalingConfig sc = *rc.scaling;
  sc.workers = opt.jobs > 0 ? opt.jobs : std::max(1U, std::thread::hardware_concurrency());
  log.info("sweeping " + std::to_string(sc.scales.size()) + " scales x " + std::to_string(sc.replications) +
           " replications on " + std::to_string(sc.workers) + " workers");

  Timing timing;
  timing.started_at = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  ConvergenceReport report;
  try {
    report = run_sweep(sc);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("config: ") + e.what());
  } catch (const std::exception& e) {
    log.warn(std::string("sweep failed: ") + e.what());
    return kRuntimeError;
  }
  timing.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& note : report.notes) {
    log.info("note: " + note);
  }
  return finish_converge(report, rc, opt.out, timing, log);
}

int cmd_inspect(const fs::path& trace_dir, std::ostream& out, const Log& log) {
  std::ifstream jobs_in(trace_dir / "jobs.csv");
  if (!jobs_in) {
    log.warn("cannot open " + (trace_dir / "jobs.csv").string());
    return kRuntimeError;
  }
  std::optional<double> horizon;
  std::string config;
  std::stringstream buffer;
  buffer << jobs_in.rdbuf();
  for (std::string line; std::getline(buffer, line) && line.rfind("# ", 0) == 0;) {
    if (line.rfind("# horizon ", 0) == 0) {
      const std::string v = line.substr(10);
      double h = 0.0;
      if (std::from_chars(v.data(), v.data() + v.size(), h).ec == std::errc{}) {
        horizon = h;
      }
    } else if (line.rfind("# config ", 0) == 0) {
      config = line.substr(9);
    }
  }
  buffer.clear();
  buffer.seekg(0);
  std::vector<io::JobRow> rows;
  try {
    rows = io::read_jobs_csv(buffer);
  } catch (const std::exception& e) {
    log.warn(e.what());
    return kRuntimeError;
  }

  std::size_t batches = 0;
  if (std::ifstream b(trace_dir / "batches.csv"); b) {
    bool header_seen = false;
    for (std::string line; std::getline(b, line);) {
      if (line.empty() || line[0] == '#') {
        continue;
      }
      batches += header_seen ? 1 : 0;
      header_seen = true;
    }
  }

  std::vector<double> sojourns;
  std::size_t waiting = 0;
  for (const auto& r : rows) {
    if (!r.departure) {
      ++waiting;
    } else if (!horizon || *r.departure <= *horizon) {
      sojourns.push_back(*r.departure - r.arrival);
    }
  }
  std::sort(sojourns.begin(), sojourns.end());
  double sum = 0.0;
  for (double s : sojourns) {
    sum += s;
  }
  ordered_json j;
  j["config_hash"] = config;
  j["horizon"] = horizon ? ordered_json(*horizon) : ordered_json();
  j["jobs"] = rows.size();
  j["batches"] = batches;
  j["completed"] = sojourns.size();
  j["in_flight"] = rows.size() - sojourns.size();
  j["behind_gate"] = waiting;
  j["mean_sojourn"] = sojourns.empty() ? ordered_json() : ordered_json(sum / static_cast<double>(sojourns.size()));
  j["max_sojourn"] = sojourns.empty() ? ordered_json() : ordered_json(sojourns.back());
  out << j.dump(2) << '\n';
  return kOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gated processor-sharing simulator and fluid-limit harness", "gps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string config_path;
  Options opt;
  std::string out_dir = "out";
  std::string trace_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--verbose", opt.verbose, "progress on stderr");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "write jobs.csv, batches.csv and snapshots.csv");
  add_common(simulate);
  CLI::App* fluid = app.add_subcommand("fluid", "write fluid.csv on the configured grid");
  add_common(fluid);
  CLI::App* converge = app.add_subcommand("converge", "scaling sweep; writes report.json and convergence.csv");
  add_common(converge);
  converge->add_option("--jobs", opt.jobs, "worker threads (default: hardware threads)");
  CLI::App* inspect = app.add_subcommand("inspect", "summarize a directory written by simulate");
  inspect->add_option("--trace", trace_dir, "directory holding jobs.csv")->required();
  inspect->add_flag("--verbose", opt.verbose, "progress on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kSchemaError;
  }
  opt.out = out_dir;
  const Log log(err, opt.verbose);

  if (inspect->parsed()) {
    return cmd_inspect(trace_dir, out, log);
  }

  try {
    RunConfig rc = load_config(config_path);
    if (const char* env = std::getenv("GPS_SEED_OVERRIDE"); env != nullptr && *env != '\0') {
      std::uint64_t seed = 0;
      const std::string_view v(env);
      const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
      if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw SchemaError("GPS_SEED_OVERRIDE must be a nonnegative integer, got '" + std::string(v) + "'");
      }
      log.warn("GPS_SEED_OVERRIDE=" + std::string(v) + " replaces config seed " + std::to_string(rc.seed));
      apply_seed_override(rc, seed);
    }
    log.info("config " + config_path + " hash " + rc.hash);
    if (simulate->parsed()) {
      return cmd_simulate(rc, opt, log);
    }
    if (fluid->parsed()) {
      return cmd_fluid(rc, opt, log);
    }
    return cmd_converge(rc, opt, log);
  } catch (const SchemaError& e) {
    err << "[gps] schema error: " << e.what() << '\n';
    return kSchemaError;
  } catch (const std::exception& e) {
    err << "[gps] runtime error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace gps::cli
