#pragma once

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "gps/distribution.hpp"
#include "gps/measure.hpp"

namespace gps {

// First arrival drawn like every other gap.
struct NoDelay {
  bool operator==(const NoDelay&) const = default;
};
// First arrival exactly at `offset` (> 0).
struct FixedDelay {
  double offset = 0.0;
  bool operator==(const FixedDelay&) const = default;
};
// First arrival drawn from the stationary excess law of the interarrival distribution.
struct EquilibriumDelay {
  bool operator==(const EquilibriumDelay&) const = default;
};

using Delay = std::variant<NoDelay, FixedDelay, EquilibriumDelay>;

struct RenewalSpec {
  DistributionSpec interarrival = DistributionSpec::exponential(1.0);
  Delay delay = NoDelay{};

  [[nodiscard]] double rate() const { return 1.0 / interarrival.mean(); }
};

// floor(r * base_count) initial jobs with iid service times from `service_law`.
struct InitialConditionSpec {
  double base_count = 0.0;
  DistributionSpec service_law = DistributionSpec::exponential(1.0);

  [[nodiscard]] double fluid_workload() const { return base_count * service_law.mean(); }
};

// Stream derivation: identical (master, index, tag) always gives the same child seed.
namespace seeds {

std::uint64_t derive(std::uint64_t master, std::uint64_t index, std::string_view tag);
Rng stream(std::uint64_t master, std::uint64_t index, std::string_view tag);

}  // namespace seeds

// One draw from the stationary excess law x -> rate * tail_integral(x).
double sample_equilibrium_residual(const DistributionSpec& interarrival, Rng& rng);

// Arrival instants of the renewal process in (0, horizon], strictly increasing.
std::vector<double> generate_arrivals(const RenewalSpec& spec, double horizon, std::uint64_t seed);

std::vector<double> sample_services(const DistributionSpec& law, std::size_t count, std::uint64_t seed);

std::size_t initial_job_count(const InitialConditionSpec& ic, double scale);
std::vector<double> sample_initial_services(const InitialConditionSpec& ic, double scale, std::uint64_t seed);
AtomicMeasure build_initial_batch(const InitialConditionSpec& ic, double scale, std::uint64_t seed);

// Advisory messages for configurations declared critical whose load is not 1.
std::vector<std::string> criticality_warnings(double arrival_rate, const DistributionSpec& service);

}  // namespace gps
