#include "gps/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gps {

namespace {

double interpolated_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) {
    return 0.0;
  }
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> expand_atoms(const AtomicMeasure& m) {
  std::vector<double> out;
  for (const auto& a : m.atoms()) {
    const double count = std::round(a.weight);
    if (std::abs(a.weight - count) > 1e-9 || count < 1.0) {
      throw std::invalid_argument("explicit initial atoms need integer job counts as weights");
    }
    if (a.location <= 0.0) {
      throw std::invalid_argument("initial service times must be positive");
    }
    out.insert(out.end(), static_cast<std::size_t>(count), a.location);
  }
  return out;
}

}  // namespace

Trace simulate(std::span<const double> initial_services, std::span<const ArrivalEvent> arrivals, double horizon,
               std::span<const double> snapshot_grid) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("horizon must be positive and finite");
  }
  Trace trace;
  trace.horizon_ = horizon;

  for (double v : initial_services) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("initial service times must be positive and finite");
    }
  }
  double last = 0.0;
  for (const auto& a : arrivals) {
    if (a.time > horizon) {
      break;
    }
    if (!(a.time > 0.0) || a.time < last) {
      throw std::invalid_argument("arrival times must be positive and nondecreasing");
    }
    if (!(a.service > 0.0) || !std::isfinite(a.service)) {
      throw std::invalid_argument("arrival service times must be positive and finite");
    }
    last = a.time;
    trace.arrivals_.push_back(a);
  }
  const auto& arr = trace.arrivals_;
  const std::size_t n0 = initial_services.size();

  trace.arrival_work_.assign(arr.size() + 1, 0.0);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    trace.arrival_work_[i + 1] = trace.arrival_work_[i] + arr[i].service;
  }

  trace.jobs_.reserve(n0 + arr.size());
  for (std::size_t i = 0; i < n0; ++i) {
    trace.jobs_.push_back({i, 0.0, initial_services[i], 0, std::nullopt});
  }
  for (std::size_t i = 0; i < arr.size(); ++i) {
    trace.jobs_.push_back({n0 + i, arr[i].time, arr[i].service, std::nullopt, std::nullopt});
  }

  auto open_batch = [&](double start, std::size_t first_job, std::size_t end_job, double idle_before) {
    std::vector<double> services;
    services.reserve(end_job - first_job);
    for (std::size_t j = first_job; j < end_job; ++j) {
      services.push_back(trace.jobs_[j].service_time);
      trace.jobs_[j].batch = trace.batches_.size();
    }
    BatchRecord b;
    b.index = trace.batches_.size();
    b.start = start;
    b.profile = AtomicMeasure::from_points(services);
    b.work = b.profile.first_moment();
    b.completion = start + b.work;
    b.next_start = ExtendedReal::infinity();
    b.size = end_job - first_job;
    b.idle_before = idle_before;
    trace.batches_.push_back(std::move(b));
  };

  open_batch(0.0, 0, n0, 0.0);

  // Batch boundaries come from arrival instants and batch work alone; the workload is
  // never compared against zero.
  auto by_time = [](double t, const ArrivalEvent& a) { return t < a.time; };
  std::size_t next = 0;
  while (next < arr.size()) {
    BatchRecord& current = trace.batches_.back();
    const double completion = current.completion;
    auto end = static_cast<std::size_t>(std::upper_bound(arr.begin() + static_cast<std::ptrdiff_t>(next), arr.end(),
                                                         completion, by_time) -
                                        arr.begin());
    double start = completion;
    if (end == next) {
      // Nobody waiting at completion: idle until the next arrival (and any simultaneous ones).
      start = arr[next].time;
      end = static_cast<std::size_t>(
          std::upper_bound(arr.begin() + static_cast<std::ptrdiff_t>(next), arr.end(), start, by_time) - arr.begin());
    }
    current.next_start = start;
    if (start > horizon) {
      break;
    }
    const double idle = current.idle_before + (start - completion);
    open_batch(start, n0 + next, n0 + end, idle);
    next = end;
  }

  for (auto& job : trace.jobs_) {
    if (job.batch) {
      const BatchRecord& b = trace.batches_[*job.batch];
      job.departure_time = b.start + b.profile.work_to_shift(job.service_time);
    }
  }

  trace.snapshots_.reserve(snapshot_grid.size());
  for (double t : snapshot_grid) {
    trace.snapshots_.push_back(trace.snapshot(t));
  }
  return trace;
}

Trace run(const SimConfig& config) {
  std::vector<double> initial;
  if (const auto* ic = std::get_if<InitialConditionSpec>(&config.initial)) {
    initial = sample_initial_services(*ic, config.scale, seeds::derive(config.seed, config.replication, "initial"));
  } else {
    initial = expand_atoms(std::get<AtomicMeasure>(config.initial));
  }
  const auto times =
      generate_arrivals(config.arrivals, config.horizon, seeds::derive(config.seed, config.replication, "arrivals"));
  const auto services =
      sample_services(config.service, times.size(), seeds::derive(config.seed, config.replication, "service"));
  std::vector<ArrivalEvent> arrivals(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    arrivals[i] = {times[i], services[i]};
  }
  return simulate(initial, arrivals, config.horizon, config.snapshot_grid);
}

void Trace::check_time(double t) const {
  if (!(t >= 0.0) || t > horizon_) {
    throw std::out_of_range("time " + std::to_string(t) + " outside [0, " + std::to_string(horizon_) + "]");
  }
}

std::size_t Trace::batch_index_at(double t) const {
  const auto it = std::upper_bound(batches_.begin(), batches_.end(), t,
                                   [](double v, const BatchRecord& b) { return v < b.start; });
  return static_cast<std::size_t>(it - batches_.begin()) - 1;
}

std::size_t Trace::arrived_count(double t) const {
  return static_cast<std::size_t>(std::upper_bound(arrivals_.begin(), arrivals_.end(), t,
                                                   [](double v, const ArrivalEvent& a) { return v < a.time; }) -
                                  arrivals_.begin());
}

double Trace::arrived_work(double t) const { return arrival_work_[arrived_count(t)]; }

double Trace::idle_time(double t) const {
  check_time(t);
  const BatchRecord& b = batches_[batch_index_at(t)];
  return b.idle_before + std::max(0.0, t - b.completion);
}

double Trace::workload_at(double t) const {
  const double w = initial_workload() + arrived_work(t) - t + idle_time(t);
  return std::max(0.0, w);
}

SimState Trace::snapshot(double t) const {
  check_time(t);
  SimState s;
  s.t = t;
  s.batch_index = batch_index_at(t);
  const BatchRecord& b = batches_[s.batch_index];
  s.batch_start = b.start;
  if (t >= b.completion) {
    s.shift = b.profile.sup_support();
  } else {
    s.shift = b.profile.shift_for_work(t - b.start);
    s.sigma = b.profile.shifted(s.shift);
  }
  const std::size_t from = arrived_count(b.start);
  const std::size_t to = arrived_count(t);
  std::vector<double> waiting;
  waiting.reserve(to - from);
  for (std::size_t i = from; i < to; ++i) {
    waiting.push_back(arrivals_[i].service);
  }
  s.mu = AtomicMeasure::from_points(waiting);
  s.workload = s.sigma.first_moment() + s.mu.first_moment();
  s.queue_length = s.sigma.total_mass() + s.mu.total_mass();
  s.idle_time = b.idle_before + std::max(0.0, t - b.completion);
  return s;
}

SojournStats Trace::sojourn_stats() const {
  SojournStats st;
  std::vector<double> sojourns;
  double wait_sum = 0.0;
  for (const auto& job : jobs_) {
    if (job.in_flight(horizon_)) {
      ++st.in_flight;
      continue;
    }
    sojourns.push_back(*job.departure_time - job.arrival_time);
    wait_sum += batches_[*job.batch].start - job.arrival_time;
  }
  st.completed = sojourns.size();
  if (sojourns.empty()) {
    return st;
  }
  double sum = 0.0;
  for (double s : sojourns) {
    sum += s;
  }
  st.mean_sojourn = sum / static_cast<double>(sojourns.size());
  st.mean_wait = wait_sum / static_cast<double>(sojourns.size());
  std::sort(sojourns.begin(), sojourns.end());
  st.p50 = interpolated_quantile(sojourns, 0.5);
  st.p90 = interpolated_quantile(sojourns, 0.9);
  st.p99 = interpolated_quantile(sojourns, 0.99);
  st.max_sojourn = sojourns.back();
  return st;
}

}  // namespace gps
