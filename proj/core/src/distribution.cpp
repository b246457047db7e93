#include "gps/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

namespace gps {

namespace {

constexpr double kInverseTolerance = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const char* what) {
  if (!ok) {
    throw std::invalid_argument(what);
  }
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Smallest x with g(x) >= y for a nondecreasing g starting at g(lo) <= y.
template <class G>
double bisect_increasing(G&& g, double y, double lo) {
  double hi = std::max(1.0, 2.0 * lo);
  while (g(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) {
      throw std::runtime_error("bisection bracket overflowed");
    }
  }
  while (hi - lo > kInverseTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    if (g(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double uniform_open01(Rng& rng) {
  // (k + 0.5) / 2^53 for k uniform on [0, 2^53)
  const auto k = static_cast<double>(rng() >> 11);
  return (k + 0.5) * 0x1.0p-53;
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::exponential:
      return "exponential";
    case Family::deterministic:
      return "deterministic";
    case Family::uniform:
      return "uniform";
    case Family::pareto:
      return "pareto";
    case Family::hyperexponential:
      return "hyperexponential";
    case Family::lognormal:
      return "lognormal";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (auto f : {Family::exponential, Family::deterministic, Family::uniform, Family::pareto,
                 Family::hyperexponential, Family::lognormal}) {
    if (family_name(f) == name) {
      return f;
    }
  }
  throw std::invalid_argument("unknown distribution family '" + std::string(name) + "'");
}

DistributionSpec::DistributionSpec(Law law) : law_(std::move(law)) {
  mean_ = std::visit(
      Overloaded{
          [](const Exponential& d) {
            require(positive_finite(d.rate), "exponential rate must be positive and finite");
            return 1.0 / d.rate;
          },
          [](const Deterministic& d) {
            require(positive_finite(d.value), "deterministic value must be positive and finite");
            return d.value;
          },
          [](const Uniform& d) {
            require(std::isfinite(d.low) && std::isfinite(d.high) && d.low >= 0.0 && d.high > d.low,
                    "uniform requires 0 <= low < high");
            return 0.5 * (d.low + d.high);
          },
          [](const Pareto& d) {
            require(positive_finite(d.scale) && positive_finite(d.shape), "pareto scale and shape must be positive");
            if (d.shape <= 1.0) {
              throw std::domain_error("pareto shape <= 1 has infinite mean");
            }
            return d.scale * d.shape / (d.shape - 1.0);
          },
          [](HyperExponential& d) {
            require(!d.probs.empty() && d.probs.size() == d.rates.size(),
                    "hyperexponential needs matching nonempty probs and rates");
            double total = 0.0;
            for (std::size_t i = 0; i < d.probs.size(); ++i) {
              require(std::isfinite(d.probs[i]) && d.probs[i] >= 0.0, "hyperexponential probs must be >= 0");
              require(positive_finite(d.rates[i]), "hyperexponential rates must be positive");
              total += d.probs[i];
            }
            require(std::abs(total - 1.0) <= 1e-9, "hyperexponential probs must sum to 1");
            for (auto& p : d.probs) {
              p /= total;
            }
            double m = 0.0;
            for (std::size_t i = 0; i < d.probs.size(); ++i) {
              m += d.probs[i] / d.rates[i];
            }
            return m;
          },
          [](const LogNormal& d) {
            require(std::isfinite(d.mu) && positive_finite(d.sigma), "lognormal needs finite mu and sigma > 0");
            return std::exp(d.mu + 0.5 * d.sigma * d.sigma);
          },
      },
      law_);
}

Family DistributionSpec::family() const { return static_cast<Family>(law_.index()); }

std::string DistributionSpec::name() const {
  std::ostringstream os;
  os.precision(12);
  os << family_name(family()) << '(';
  std::visit(Overloaded{
                 [&](const Exponential& d) { os << "rate=" << d.rate; },
                 [&](const Deterministic& d) { os << "value=" << d.value; },
                 [&](const Uniform& d) { os << "low=" << d.low << ",high=" << d.high; },
                 [&](const Pareto& d) { os << "scale=" << d.scale << ",shape=" << d.shape; },
                 [&](const HyperExponential& d) {
                   for (std::size_t i = 0; i < d.probs.size(); ++i) {
                     os << (i ? ";" : "") << d.probs[i] << '@' << d.rates[i];
                   }
                 },
                 [&](const LogNormal& d) { os << "mu=" << d.mu << ",sigma=" << d.sigma; },
             },
             law_);
  os << ')';
  return os.str();
}

double DistributionSpec::survival(double x) const {
  if (x < 0.0) {
    return 1.0;
  }
  return std::visit(Overloaded{
                        [&](const Exponential& d) { return std::exp(-d.rate * x); },
                        [&](const Deterministic& d) { return x >= d.value ? 0.0 : 1.0; },
                        [&](const Uniform& d) {
                          if (x <= d.low) {
                            return 1.0;
                          }
                          if (x >= d.high) {
                            return 0.0;
                          }
                          return (d.high - x) / (d.high - d.low);
                        },
                        [&](const Pareto& d) { return x <= d.scale ? 1.0 : std::pow(d.scale / x, d.shape); },
                        [&](const HyperExponential& d) {
                          double s = 0.0;
                          for (std::size_t i = 0; i < d.probs.size(); ++i) {
                            s += d.probs[i] * std::exp(-d.rates[i] * x);
                          }
                          return s;
                        },
                        [&](const LogNormal& d) {
                          if (x <= 0.0) {
                            return 1.0;
                          }
                          return 0.5 * std::erfc((std::log(x) - d.mu) / (d.sigma * std::sqrt(2.0)));
                        },
                    },
                    law_);
}

double DistributionSpec::cdf(double x) const {
  if (x < 0.0) {
    return 0.0;
  }
  return std::visit(Overloaded{
                        [&](const Exponential& d) { return -std::expm1(-d.rate * x); },
                        [&](const LogNormal& d) {
                          if (x <= 0.0) {
                            return 0.0;
                          }
                          return std_normal_cdf((std::log(x) - d.mu) / d.sigma);
                        },
                        [&](const auto&) { return 1.0 - survival(x); },
                    },
                    law_);
}

ExtendedReal DistributionSpec::sup_support() const {
  return std::visit(Overloaded{
                        [](const Deterministic& d) { return ExtendedReal(d.value); },
                        [](const Uniform& d) { return ExtendedReal(d.high); },
                        [](const auto&) { return ExtendedReal::infinity(); },
                    },
                    law_);
}

ExtendedReal DistributionSpec::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw std::invalid_argument("quantile level must lie in [0, 1]");
  }
  if (u == 1.0) {
    return sup_support();
  }
  return std::visit(Overloaded{
                        [&](const Exponential& d) { return ExtendedReal(-std::log1p(-u) / d.rate); },
                        [&](const Deterministic& d) { return ExtendedReal(d.value); },
                        [&](const Uniform& d) { return ExtendedReal(d.low + u * (d.high - d.low)); },
                        [&](const Pareto& d) { return ExtendedReal(d.scale * std::pow(1.0 - u, -1.0 / d.shape)); },
                        [&](const HyperExponential&) {
                          if (u == 0.0) {
                            return ExtendedReal(0.0);
                          }
                          return ExtendedReal(bisect_increasing([&](double x) { return cdf(x); }, u, 0.0));
                        },
                        [&](const LogNormal& d) {
                          if (u == 0.0) {
                            return ExtendedReal(0.0);
                          }
                          const double z = -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
                          return ExtendedReal(std::exp(d.mu + d.sigma * z));
                        },
                    },
                    law_);
}

double DistributionSpec::tail_integral(double x) const {
  if (x <= 0.0) {
    return 0.0;
  }
  return std::visit(Overloaded{
                        [&](const Exponential& d) { return -std::expm1(-d.rate * x) / d.rate; },
                        [&](const Deterministic& d) { return std::min(x, d.value); },
                        [&](const Uniform& d) {
                          if (x <= d.low) {
                            return x;
                          }
                          if (x >= d.high) {
                            return mean_;
                          }
                          const double width = d.high - d.low;
                          const double left = d.high - x;
                          return d.low + (width * width - left * left) / (2.0 * width);
                        },
                        [&](const Pareto& d) {
                          if (x <= d.scale) {
                            return x;
                          }
                          return d.scale + d.scale / (d.shape - 1.0) * (1.0 - std::pow(d.scale / x, d.shape - 1.0));
                        },
                        [&](const HyperExponential& d) {
                          double s = 0.0;
                          for (std::size_t i = 0; i < d.probs.size(); ++i) {
                            s += d.probs[i] * -std::expm1(-d.rates[i] * x) / d.rates[i];
                          }
                          return s;
                        },
                        [&](const LogNormal& d) {
                          // x * S(x) + E[X; X <= x]
                          const double z = (std::log(x) - d.mu) / d.sigma;
                          return x * survival(x) + mean_ * std_normal_cdf(z - d.sigma);
                        },
                    },
                    law_);
}

double DistributionSpec::tail_integral_inverse(double y) const {
  if (y <= 0.0) {
    return 0.0;
  }
  if (y >= mean_) {
    throw std::domain_error("tail_integral_inverse: argument at or above the mean");
  }
  return std::visit(Overloaded{
                        [&](const Exponential& d) { return -std::log1p(-d.rate * y) / d.rate; },
                        [&](const Deterministic&) { return y; },
                        [&](const Uniform& d) {
                          if (y <= d.low) {
                            return y;
                          }
                          const double width = d.high - d.low;
                          const double rest = width * width - 2.0 * width * (y - d.low);
                          return d.high - std::sqrt(std::max(0.0, rest));
                        },
                        [&](const auto&) {
                          // tail_integral(x) <= x, so the root lies at or beyond y.
                          return bisect_increasing([&](double x) { return tail_integral(x); }, y, y);
                        },
                    },
                    law_);
}

double DistributionSpec::sample(Rng& rng) const {
  if (const auto* h = std::get_if<HyperExponential>(&law_)) {
    const double pick = uniform_open01(rng);
    const double u = uniform_open01(rng);
    double acc = 0.0;
    std::size_t branch = h->probs.size() - 1;
    for (std::size_t i = 0; i < h->probs.size(); ++i) {
      acc += h->probs[i];
      if (pick < acc) {
        branch = i;
        break;
      }
    }
    return -std::log(u) / h->rates[branch];
  }
  return quantile(uniform_open01(rng)).value();
}

}  // namespace gps
