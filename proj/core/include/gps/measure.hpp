#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "gps/distribution.hpp"
#include "gps/extended_real.hpp"
#include "gps/test_functions.hpp"

namespace gps {

struct Atom {
  double location = 0.0;
  double weight = 0.0;

  bool operator==(const Atom&) const = default;
};

// Finite nonnegative measure on [0, inf) given by finitely many weighted atoms.
//
// Atoms are kept sorted by location with equal locations merged, so two measures are
// equal exactly when their atom lists are. Prefix sums over the sorted atoms make the
// shift-work function and its inverse O(log n).
class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  // Throws std::invalid_argument on a negative or non-finite location or a non-positive weight.
  explicit AtomicMeasure(std::vector<Atom> atoms);

  // Unit-weight atoms at the given locations (one per job).
  static AtomicMeasure from_points(std::span<const double> locations, double weight = 1.0);

  [[nodiscard]] std::span<const Atom> atoms() const { return atoms_; }
  [[nodiscard]] bool empty() const { return atoms_.empty(); }
  [[nodiscard]] std::size_t size() const { return atoms_.size(); }

  [[nodiscard]] double total_mass() const { return tail_mass_.front(); }
  [[nodiscard]] double first_moment() const { return head_moment_.back(); }
  // Mass of [0, x], atoms at x included.
  [[nodiscard]] double cumulative_mass(double x) const;
  // Largest atom location; 0 for the zero measure.
  [[nodiscard]] double sup_support() const { return atoms_.empty() ? 0.0 : atoms_.back().location; }

  // Sum of weight * min(location, x): the work needed to advance every atom by x.
  [[nodiscard]] double work_to_shift(double x) const;
  // Inverse of work_to_shift on [0, first_moment); saturates at sup_support() above it.
  [[nodiscard]] double shift_for_work(double y) const;

  // Moves every atom left by x and drops those that reach zero or below.
  [[nodiscard]] AtomicMeasure shifted(double x) const;
  [[nodiscard]] AtomicMeasure scaled(double factor) const;

  [[nodiscard]] double integrate(const TestFunction& f) const;

  bool operator==(const AtomicMeasure& other) const { return atoms_ == other.atoms_; }

 private:
  void build_prefix_sums();

  std::vector<Atom> atoms_;
  std::vector<double> head_moment_{0.0};  // head_moment_[i] = sum_{j<i} w_j x_j
  std::vector<double> tail_mass_{0.0};    // tail_mass_[i] = sum_{j>=i} w_j
};

// scale * law, for a probability law with closed-form functionals.
struct ScaledDistribution {
  double scale = 0.0;
  DistributionSpec law = DistributionSpec::exponential(1.0);

  bool operator==(const ScaledDistribution&) const = default;
};

// base shifted left by `offset` with the mass at or below zero removed, evaluated lazily
// through the base law instead of being materialized.
struct ShiftedView {
  ScaledDistribution base;
  double offset = 0.0;

  bool operator==(const ShiftedView&) const = default;
};

using Measure = std::variant<AtomicMeasure, ScaledDistribution, ShiftedView>;

double total_mass(const Measure& m);
double first_moment(const Measure& m);
double cumulative_mass(const Measure& m, double x);
double work_to_shift(const Measure& m, double x);
// Continuous inverse of work_to_shift below the first moment; the supremum of the
// support at or above it (the infinity sentinel for unbounded support, 0 for the zero measure).
ExtendedReal shift_for_work(const Measure& m, double y);
ExtendedReal sup_support(const Measure& m);
double integrate(const Measure& m, const TestFunction& f);
bool is_zero(const Measure& m);

// Shift with truncation. Exponential, deterministic, uniform and hyperexponential laws
// are closed under it; other laws come back as a ShiftedView.
Measure shift_truncate(const Measure& m, double x);

struct DiscretizationGrid {
  std::size_t atoms = 2048;
};

// Atomic approximation of the shifted law: `grid.atoms` equal-weight atoms at the
// midpoint quantiles of the conditional law beyond x.
AtomicMeasure shift_truncate_discretized(const ScaledDistribution& m, double x, DiscretizationGrid grid = {});

// max over the set of |<f, a> - <f, b>|.
double discrepancy(const Measure& a, const Measure& b, const TestFunctionSet& set);

}  // namespace gps
