#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gps/extended_real.hpp"

namespace gps {

using Rng = std::mt19937_64;

// Uniform draw on the open interval (0, 1) from the top 53 bits of the generator.
double uniform_open01(Rng& rng);

struct Exponential {
  double rate = 1.0;

  bool operator==(const Exponential&) const = default;
};

struct Deterministic {
  double value = 1.0;

  bool operator==(const Deterministic&) const = default;
};

struct Uniform {
  double low = 0.0;
  double high = 1.0;

  bool operator==(const Uniform&) const = default;
};

struct Pareto {
  double scale = 1.0;  // x_m, the left end of the support
  double shape = 2.0;

  bool operator==(const Pareto&) const = default;
};

struct HyperExponential {
  std::vector<double> probs;
  std::vector<double> rates;

  bool operator==(const HyperExponential&) const = default;
};

struct LogNormal {
  double mu = 0.0;
  double sigma = 1.0;

  bool operator==(const LogNormal&) const = default;
};

enum class Family { exponential, deterministic, uniform, pareto, hyperexponential, lognormal };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);

// A probability law on (0, inf) with finite positive mean and no atom at zero.
// Parameters are validated on construction; every accessor is total afterwards.
class DistributionSpec {
 public:
  using Law = std::variant<Exponential, Deterministic, Uniform, Pareto, HyperExponential, LogNormal>;

  explicit DistributionSpec(Law law);

  static DistributionSpec exponential(double rate) { return DistributionSpec(Exponential{rate}); }
  static DistributionSpec deterministic(double value) { return DistributionSpec(Deterministic{value}); }
  static DistributionSpec uniform(double low, double high) { return DistributionSpec(Uniform{low, high}); }
  static DistributionSpec pareto(double scale, double shape) { return DistributionSpec(Pareto{scale, shape}); }
  static DistributionSpec hyperexponential(std::vector<double> probs, std::vector<double> rates) {
    return DistributionSpec(HyperExponential{std::move(probs), std::move(rates)});
  }
  static DistributionSpec lognormal(double mu, double sigma) { return DistributionSpec(LogNormal{mu, sigma}); }

  [[nodiscard]] const Law& law() const { return law_; }
  [[nodiscard]] Family family() const;
  [[nodiscard]] std::string name() const;  // e.g. "exponential(rate=1)"

  [[nodiscard]] double mean() const { return mean_; }
  [[nodiscard]] double cdf(double x) const;
  [[nodiscard]] double survival(double x) const;  // 1 - cdf, computed directly where possible
  // Generalized inverse of the cdf. u == 1 yields the upper end of the support.
  [[nodiscard]] ExtendedReal quantile(double u) const;
  [[nodiscard]] ExtendedReal sup_support() const;
  [[nodiscard]] bool has_atoms() const { return family() == Family::deterministic; }

  // Integral of the survival function over [0, x]; tends to mean() as x grows.
  [[nodiscard]] double tail_integral(double x) const;
  // Inverse of tail_integral on [0, mean()). Exact for exponential, deterministic and
  // uniform laws, bisection to 1e-12 in x otherwise.
  [[nodiscard]] double tail_integral_inverse(double y) const;

  [[nodiscard]] double sample(Rng& rng) const;

  bool operator==(const DistributionSpec& other) const { return law_ == other.law_; }

 private:
  Law law_;
  double mean_ = 0.0;
};

}  // namespace gps
