#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gps/fluid.hpp"
#include "gps/measure.hpp"
#include "gps/simulator.hpp"
#include "gps/test_functions.hpp"

namespace gps {

// State of the r-th system under fluid scaling: mass divided by r at time r t.
// Service-time locations are left unscaled.
struct ScaledSnapshot {
  AtomicMeasure sigma;
  AtomicMeasure mu;
  double workload = 0.0;
};

// Throws std::out_of_range when r * t exceeds the trace horizon.
ScaledSnapshot scaled_snapshot(const Trace& trace, double r, double t);

enum class FluidReference {
  idealized,        // the configured fluid xi for every replication
  per_replication,  // each replication's own scaled initial batch
};

struct ScalingConfig {
  std::vector<double> scales;
  std::size_t replications = 1;
  SimConfig base;  // scale, horizon, snapshot grid and seed are set per replication
  FluidParams fluid;
  FluidReference reference = FluidReference::idealized;
  std::vector<double> time_grid;           // fluid time
  std::optional<double> exclusion_radius;  // defaults to 0.05 * w
  bool score_near_multiples = false;
  TestFunctionSet tests = TestFunctionSet::defaults();
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

// Mean and max over replications of |<f, scaled> - <f, fluid>| at one (r, t, f).
// The tag is "sigma/<f>" or "mu/<f>".
struct ErrorCell {
  double r = 0.0;
  double t = 0.0;
  std::string tag;
  double mean_abs = 0.0;
  double max_abs = 0.0;
};

struct ScaleSummary {
  double r = 0.0;
  // Mean over replications and kept grid points of sigma discrepancy + mu discrepancy.
  double aggregate = 0.0;
  // sup over the grid of |W_bar(t) - w|, averaged over replications, and its worst case.
  double workload_sup_error = 0.0;
  double workload_sup_error_max = 0.0;
  std::vector<std::uint64_t> seeds;
  std::size_t simulated_jobs = 0;  // summed over replications
};

struct ConvergenceReport {
  std::vector<ScaleSummary> scales;
  std::vector<double> kept_times;
  std::vector<double> excluded_times;
  std::vector<std::string> test_tags;
  std::vector<ErrorCell> cells;
  double fluid_workload = 0.0;
  double exclusion_radius = 0.0;
  std::vector<std::string> notes;
};

class ReplicationError : public std::runtime_error {
 public:
  ReplicationError(const std::string& what, double r, std::uint64_t seed)
      : std::runtime_error(what), r_(r), seed_(seed) {}
  [[nodiscard]] double scale() const { return r_; }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }

 private:
  double r_;
  std::uint64_t seed_;
};

// Grid points at least `radius` away from every positive multiple of w (and from 0).
// Everything is kept when w == 0.
bool is_kept_time(double t, double w, double radius);

std::uint64_t replication_seed(std::uint64_t master, std::size_t scale_index, std::size_t replication);

// Throws std::invalid_argument on an invalid config and ReplicationError when a
// replication fails.
ConvergenceReport run_sweep(const ScalingConfig& cfg);

struct ConvergenceRule {
  double required_ratio = 0.5;  // D(r_max) <= ratio * D(r_min)
  double monotone_slack = 0.1;  // D(r_{i+1}) <= (1 + slack) * D(r_i)
  std::optional<double> workload_bound;
};

struct CheckResult {
  bool passed = false;
  std::string narrative;
};

// Throws std::invalid_argument for fewer than two scales.
CheckResult check_convergence(const ConvergenceReport& report, const ConvergenceRule& rule = {});

}  // namespace gps
