#include "gps/primitives.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <type_traits>

namespace gps {

namespace seeds {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive(std::uint64_t master, std::uint64_t index, std::string_view tag) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL) ^ fnv1a(tag));
}

Rng stream(std::uint64_t master, std::uint64_t index, std::string_view tag) {
  return Rng(derive(master, index, tag));
}

}  // namespace seeds

double sample_equilibrium_residual(const DistributionSpec& interarrival, Rng& rng) {
  const double u = uniform_open01(rng);
  return interarrival.tail_integral_inverse(u * interarrival.mean());
}

std::vector<double> generate_arrivals(const RenewalSpec& spec, double horizon, std::uint64_t seed) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("arrival horizon must be positive and finite");
  }
  Rng rng(seed);
  double t = std::visit(
      [&](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, FixedDelay>) {
          if (!(d.offset > 0.0)) {
            throw std::invalid_argument("fixed arrival delay must be positive (E(0) = 0)");
          }
          return d.offset;
        } else if constexpr (std::is_same_v<D, EquilibriumDelay>) {
          return sample_equilibrium_residual(spec.interarrival, rng);
        } else {
          return spec.interarrival.sample(rng);
        }
      },
      spec.delay);

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(horizon * spec.rate() * 1.1) + 16);
  while (t <= horizon) {
    out.push_back(t);
    double next = t + spec.interarrival.sample(rng);
    if (next <= t) {
      next = std::nextafter(t, std::numeric_limits<double>::infinity());
    }
    t = next;
  }
  return out;
}

std::vector<double> sample_services(const DistributionSpec& law, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(count);
  for (auto& v : out) {
    v = law.sample(rng);
  }
  return out;
}

std::size_t initial_job_count(const InitialConditionSpec& ic, double scale) {
  if (!std::isfinite(ic.base_count) || ic.base_count < 0.0) {
    throw std::invalid_argument("initial base count must be finite and nonnegative");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("scale must be positive and finite");
  }
  const double n = scale * ic.base_count;
  // absorb representation error such as 100 * 0.29 = 28.999999999999996
  return static_cast<std::size_t>(std::floor(n * (1.0 + 1e-12)));
}

std::vector<double> sample_initial_services(const InitialConditionSpec& ic, double scale, std::uint64_t seed) {
  return sample_services(ic.service_law, initial_job_count(ic, scale), seed);
}

AtomicMeasure build_initial_batch(const InitialConditionSpec& ic, double scale, std::uint64_t seed) {
  const auto services = sample_initial_services(ic, scale, seed);
  return AtomicMeasure::from_points(services);
}

std::vector<std::string> criticality_warnings(double arrival_rate, const DistributionSpec& service) {
  std::vector<std::string> out;
  const double load = arrival_rate * service.mean();
  if (std::abs(load - 1.0) > 1e-9) {
    std::ostringstream os;
    os.precision(12);
    os << "configuration tagged critical has load alpha * mean(nu) = " << load << " != 1";
    out.push_back(os.str());
  }
  return out;
}

}  // namespace gps
