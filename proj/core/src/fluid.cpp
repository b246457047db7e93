#include "gps/fluid.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gps {

std::vector<std::string> FluidParams::validation_notes() const {
  std::vector<std::string> notes;
  const double load = alpha * nu.mean();
  if (std::abs(load - 1.0) > 1e-9) {
    std::ostringstream os;
    os.precision(12);
    os << "fluid model is not critical: alpha * mean(nu) = " << load;
    notes.push_back(os.str());
  }
  if (nu.has_atoms()) {
    notes.push_back("nu has atoms (outside-theorem)");
  }
  const bool atomic_xi = std::holds_alternative<AtomicMeasure>(xi) && !is_zero(xi);
  const bool atomic_law = std::holds_alternative<ScaledDistribution>(xi) &&
                          std::get<ScaledDistribution>(xi).law.has_atoms();
  if (atomic_xi || atomic_law) {
    notes.push_back("xi has atoms (outside-theorem)");
  }
  return notes;
}

namespace {

// m shifted through `work` units of processor-sharing service.
Measure serve(const Measure& m, double work) {
  const ExtendedReal shift = shift_for_work(m, work);
  if (shift.is_infinite()) {
    return AtomicMeasure{};
  }
  return shift_truncate(m, shift.value());
}

}  // namespace

double residue(double t, double w) {
  if (t < 0.0) {
    throw std::invalid_argument("residue: negative time");
  }
  if (w <= 0.0) {
    return 0.0;
  }
  return std::fmod(t, w);
}

Measure fluid_mu(const FluidParams& p, double t) {
  const double w = p.workload();
  if (w <= 0.0) {
    return AtomicMeasure{};
  }
  const double mass = p.alpha * residue(t, w);
  if (mass <= 0.0) {
    return AtomicMeasure{};
  }
  return ScaledDistribution{mass, p.nu};
}

Measure fluid_sigma(const FluidParams& p, double t) {
  if (t < 0.0) {
    throw std::invalid_argument("fluid_sigma: negative time");
  }
  const double w = p.workload();
  if (w <= 0.0) {
    return AtomicMeasure{};
  }
  if (t < w) {
    return serve(p.xi, t);
  }
  const Measure cycle = ScaledDistribution{p.alpha * w, p.nu};
  return serve(cycle, residue(t, w));
}

FluidState fluid_state(const FluidParams& p, double t) {
  return {t, fluid_sigma(p, t), fluid_mu(p, t), residue(t, p.workload())};
}

double fluid_workload(const FluidParams& p, double t) {
  if (t < 0.0) {
    throw std::invalid_argument("fluid_workload: negative time");
  }
  return p.workload();
}

double fluid_queue_length(const FluidParams& p, double t) {
  return total_mass(fluid_sigma(p, t)) + total_mass(fluid_mu(p, t));
}

}  // namespace gps
