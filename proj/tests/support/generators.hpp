#pragma once

// Random instances and brute-force reference computations shared by the test suites.
// Nothing here calls into the prefix-sum or event machinery it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "gps/distribution.hpp"
#include "gps/fluid.hpp"
#include "gps/measure.hpp"
#include "gps/simulator.hpp"

namespace gps::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Up to max_atoms atoms with locations and weights in (0, 10].
inline std::vector<Atom> random_atoms(std::mt19937_64& rng, std::size_t max_atoms = 64) {
  const auto n = std::uniform_int_distribution<std::size_t>(1, max_atoms)(rng);
  std::vector<Atom> atoms(n);
  for (auto& a : atoms) {
    a.location = 10.0 - uniform(rng, 0.0, 10.0);  // (0, 10]
    a.weight = 10.0 - uniform(rng, 0.0, 10.0);
  }
  return atoms;
}

inline AtomicMeasure random_measure(std::mt19937_64& rng, std::size_t max_atoms = 64) {
  return AtomicMeasure(random_atoms(rng, max_atoms));
}

// sum w * min(x, location) by direct summation over an unsorted atom list.
inline double direct_shift_work(const std::vector<Atom>& atoms, double x) {
  double s = 0.0;
  for (const auto& a : atoms) {
    s += a.weight * std::min(a.location, x);
  }
  return s;
}

// Piecewise-linear inversion of direct_shift_work through its knots at the atom locations.
inline double brute_force_inverse(std::vector<Atom> atoms, double y) {
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.location < b.location; });
  double prev_x = 0.0;
  double prev_f = 0.0;
  for (const auto& a : atoms) {
    const double f = direct_shift_work(atoms, a.location);
    if (y < f) {
      return prev_x + (y - prev_f) * (a.location - prev_x) / (f - prev_f);
    }
    prev_x = a.location;
    prev_f = f;
  }
  return atoms.empty() ? 0.0 : atoms.back().location;
}

// Composite Simpson rule for smooth integrands.
template <class F>
double simpson(F&& f, double a, double b, std::size_t panels = 20000) {
  if (panels % 2) {
    ++panels;
  }
  const double h = (b - a) / static_cast<double>(panels);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < panels; ++i) {
    s += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  }
  return s * h / 3.0;
}

// Egalitarian processor sharing for one batch with no arrivals, stepped from one
// completion to the next: every remaining job is served at rate 1 / (#remaining).
inline std::vector<double> ps_departures(const std::vector<double>& services, double start = 0.0) {
  std::vector<double> residual = services;
  std::vector<double> departure(services.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> done(services.size(), false);
  double t = start;
  std::size_t remaining = services.size();
  while (remaining > 0) {
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < residual.size(); ++i) {
      if (!done[i]) {
        smallest = std::min(smallest, residual[i]);
      }
    }
    t += smallest * static_cast<double>(remaining);
    std::size_t finished = 0;
    for (std::size_t i = 0; i < residual.size(); ++i) {
      if (done[i]) {
        continue;
      }
      residual[i] -= smallest;
      if (residual[i] <= 1e-12 * std::max(1.0, services[i])) {
        done[i] = true;
        departure[i] = t;
        ++finished;
      }
    }
    remaining -= finished;
  }
  return departure;
}

inline DistributionSpec random_law(std::mt19937_64& rng, double mean) {
  switch (std::uniform_int_distribution<int>(0, 5)(rng)) {
    case 0:
      return DistributionSpec::exponential(1.0 / mean);
    case 1:
      return DistributionSpec::deterministic(mean);
    case 2: {
      const double half = uniform(rng, 0.0, mean);
      return DistributionSpec::uniform(mean - half, mean + half);
    }
    case 3: {
      const double shape = uniform(rng, 2.1, 4.0);
      return DistributionSpec::pareto(mean * (shape - 1.0) / shape, shape);
    }
    case 4: {
      // two branches with means mean/2 and 3 mean/2, equal probability
      return DistributionSpec::hyperexponential({0.5, 0.5}, {2.0 / mean, 2.0 / (3.0 * mean)});
    }
    default: {
      const double sigma = uniform(rng, 0.2, 1.0);
      return DistributionSpec::lognormal(std::log(mean) - 0.5 * sigma * sigma, sigma);
    }
  }
}

// G/G/1 gated configuration with mixed families and load drawn from {0.6, 1, 1.4}.
inline SimConfig random_sim_config(std::mt19937_64& rng) {
  const double loads[] = {0.6, 1.0, 1.4};
  const double load = loads[std::uniform_int_distribution<int>(0, 2)(rng)];
  const double alpha = uniform(rng, 0.5, 2.0);
  SimConfig cfg;
  cfg.arrivals.interarrival = random_law(rng, 1.0 / alpha);
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0:
      cfg.arrivals.delay = NoDelay{};
      break;
    case 1:
      cfg.arrivals.delay = EquilibriumDelay{};
      break;
    default:
      cfg.arrivals.delay = FixedDelay{uniform(rng, 0.1, 3.0)};
  }
  cfg.service = random_law(rng, load / alpha);
  cfg.initial = InitialConditionSpec{uniform(rng, 0.0, 3.0), random_law(rng, 1.0)};
  cfg.scale = static_cast<double>(std::uniform_int_distribution<int>(1, 20)(rng));
  cfg.horizon = uniform(rng, 20.0, 200.0);
  cfg.seed = rng();
  return cfg;
}

// Critical fluid parameters; xi is a scaled law or a random atomic measure.
inline FluidParams random_fluid_params(std::mt19937_64& rng) {
  FluidParams p;
  p.alpha = uniform(rng, 0.5, 2.0);
  p.nu = random_law(rng, 1.0 / p.alpha);
  if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
    p.xi = random_measure(rng, 16).scaled(0.05);
  } else {
    p.xi = ScaledDistribution{uniform(rng, 0.2, 3.0), random_law(rng, uniform(rng, 0.3, 2.0))};
  }
  return p;
}

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace gps::testing
