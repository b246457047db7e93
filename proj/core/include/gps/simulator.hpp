#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "gps/extended_real.hpp"
#include "gps/measure.hpp"
#include "gps/primitives.hpp"

namespace gps {

struct ArrivalEvent {
  double time = 0.0;
  double service = 0.0;
};

struct Job {
  std::size_t id = 0;
  double arrival_time = 0.0;  // 0 for initial jobs
  double service_time = 0.0;
  std::optional<std::size_t> batch;       // unset while still waiting behind the gate at the horizon
  std::optional<double> departure_time;   // unset iff batch is unset

  // Still in the system at the horizon, or never admitted.
  [[nodiscard]] bool in_flight(double horizon) const { return !departure_time || *departure_time > horizon; }
};

struct BatchRecord {
  std::size_t index = 0;
  double start = 0.0;
  AtomicMeasure profile;
  double work = 0.0;        // first moment of the profile
  double completion = 0.0;  // start + work
  ExtendedReal next_start;  // infinity when no later arrival is known
  std::size_t size = 0;     // number of jobs
  double idle_before = 0.0;  // cumulative idle time in [0, start]

  [[nodiscard]] double idle_after() const {
    return next_start.is_infinite() ? 0.0 : next_start.value() - completion;
  }
};

struct SimState {
  double t = 0.0;
  AtomicMeasure sigma;  // residual service times of the active batch
  AtomicMeasure mu;     // full service times of jobs waiting behind the gate
  double workload = 0.0;
  double queue_length = 0.0;
  std::size_t batch_index = 0;
  double batch_start = 0.0;
  double shift = 0.0;  // service attained by every job of the active batch
  double idle_time = 0.0;
};

struct SojournStats {
  std::size_t completed = 0;
  std::size_t in_flight = 0;
  double mean_sojourn = 0.0;
  double mean_wait = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  double max_sojourn = 0.0;
};

struct SimConfig {
  RenewalSpec arrivals;
  DistributionSpec service = DistributionSpec::exponential(1.0);
  std::variant<InitialConditionSpec, AtomicMeasure> initial = InitialConditionSpec{};
  double scale = 1.0;  // multiplies the initial base count
  double horizon = 1.0;
  std::vector<double> snapshot_grid;
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
};

// Complete record of one gated processor-sharing run on [0, horizon].
//
// Batches are stored with their starting profiles; the state at any t is rebuilt on
// demand from the active batch (shift by the inverse work function) and the arrivals
// since its gate opened.
class Trace {
 public:
  [[nodiscard]] double horizon() const { return horizon_; }
  [[nodiscard]] const std::vector<BatchRecord>& batches() const { return batches_; }
  [[nodiscard]] const std::vector<Job>& jobs() const { return jobs_; }
  [[nodiscard]] const std::vector<ArrivalEvent>& arrivals() const { return arrivals_; }
  [[nodiscard]] const std::vector<SimState>& snapshots() const { return snapshots_; }
  [[nodiscard]] double initial_workload() const { return batches_.front().work; }

  // Index of the active batch at t (idle periods belong to the batch that just finished).
  [[nodiscard]] std::size_t batch_index_at(double t) const;

  // Throws std::out_of_range outside [0, horizon].
  [[nodiscard]] SimState snapshot(double t) const;
  // W0 + arrived work - t + idle time.
  [[nodiscard]] double workload_at(double t) const;
  [[nodiscard]] double idle_time(double t) const;
  [[nodiscard]] double arrived_work(double t) const;
  [[nodiscard]] std::size_t arrived_count(double t) const;

  [[nodiscard]] SojournStats sojourn_stats() const;

 private:
  friend Trace simulate(std::span<const double>, std::span<const ArrivalEvent>, double, std::span<const double>);

  void check_time(double t) const;

  double horizon_ = 0.0;
  std::vector<BatchRecord> batches_;
  std::vector<Job> jobs_;
  std::vector<ArrivalEvent> arrivals_;
  std::vector<double> arrival_work_;  // arrival_work_[i] = work of the first i arrivals
  std::vector<SimState> snapshots_;
};

// Runs the gated processor-sharing dynamics for explicit primitives. Arrivals must be
// strictly positive, nondecreasing in time, and have positive service; those after the
// horizon are ignored.
Trace simulate(std::span<const double> initial_services, std::span<const ArrivalEvent> arrivals, double horizon,
               std::span<const double> snapshot_grid = {});

// Draws primitives from the configured laws (seed streams "initial", "arrivals",
// "service" under the replication index) and simulates them.
Trace run(const SimConfig& config);

}  // namespace gps
