#pragma once

#include <string>
#include <vector>

#include "gps/distribution.hpp"
#include "gps/measure.hpp"

namespace gps {

// Arrival rate, service law and initial condition of the critical fluid model.
struct FluidParams {
  double alpha = 1.0;
  DistributionSpec nu = DistributionSpec::exponential(1.0);
  Measure xi = AtomicMeasure{};

  // Initial fluid workload; also the period of the limit cycle.
  [[nodiscard]] double workload() const { return first_moment(xi); }

  // Non-fatal findings: load away from 1, atoms in xi or nu (outside the limit theorem).
  [[nodiscard]] std::vector<std::string> validation_notes() const;
};

struct FluidState {
  double t = 0.0;
  Measure sigma;
  Measure mu;
  double residue = 0.0;
};

// t modulo w, with the convention that everything is 0 modulo 0.
double residue(double t, double w);

// Jobs waiting behind the gate: alpha * residue(t, w) * nu.
Measure fluid_mu(const FluidParams& p, double t);
// Residual service of the active batch: xi shifted through its own work on [0, w),
// then alpha * w * nu shifted through the time since the last multiple of w.
Measure fluid_sigma(const FluidParams& p, double t);
FluidState fluid_state(const FluidParams& p, double t);

// Constant w; the identity <x, sigma(t)> + <x, mu(t)> = w is checked by the tests.
double fluid_workload(const FluidParams& p, double t);
double fluid_queue_length(const FluidParams& p, double t);

}  // namespace gps
