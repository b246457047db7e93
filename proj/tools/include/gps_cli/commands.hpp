#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "gps/harness.hpp"
#include "gps_cli/config.hpp"

namespace gps::cli {

enum ExitCode : int {
  kOk = 0,
  kSchemaError = 2,
  kRuntimeError = 3,
  kCheckFailed = 4,
};

struct Options {
  std::filesystem::path out = "out";
  unsigned jobs = 0;  // 0: one worker per hardware thread
  bool verbose = false;
};

class Log {
 public:
  Log(std::ostream& err, bool verbose) : err_(err), verbose_(verbose) {}
  void info(const std::string& msg) const;
  void warn(const std::string& msg) const;

 private:
  std::ostream& err_;
  bool verbose_;
};

struct Timing {
  std::string started_at;  // ISO 8601, UTC
  double wall_clock_seconds = 0.0;
};

// Comment lines written at the top of every CSV.
std::vector<std::string> provenance_header(const RunConfig& rc);

// Each command throws SchemaError for config problems it detects and returns an exit code otherwise.
int cmd_simulate(const RunConfig& rc, const Options& opt, const Log& log);
int cmd_fluid(const RunConfig& rc, const Options& opt, const Log& log);
int cmd_converge(const RunConfig& rc, const Options& opt, const Log& log);
// Prints a JSON summary of a jobs.csv / batches.csv directory to `out`.
int cmd_inspect(const std::filesystem::path& trace_dir, std::ostream& out, const Log& log);

nlohmann::ordered_json report_json(const ConvergenceReport& report, const RunConfig& rc, const CheckResult& check,
                                   const Timing& timing);
// Writes report.json and convergence.csv; kOk iff the convergence check passes.
int finish_converge(const ConvergenceReport& report, const RunConfig& rc, const std::filesystem::path& out,
                    const Timing& timing, const Log& log);

// Full command line: gps <simulate|fluid|converge|inspect> [flags].
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gps::cli
