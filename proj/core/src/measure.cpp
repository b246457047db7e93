#include "gps/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/expint.hpp>

namespace gps {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

// ---------------------------------------------------------------------------
// AtomicMeasure

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  for (const auto& a : atoms_) {
    if (!std::isfinite(a.location) || a.location < 0.0) {
      throw std::invalid_argument("atom location must be finite and nonnegative");
    }
    if (!std::isfinite(a.weight) || a.weight <= 0.0) {
      throw std::invalid_argument("atom weight must be finite and positive");
    }
  }
  std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.location < b.location; });
  std::vector<Atom> merged;
  merged.reserve(atoms_.size());
  for (const auto& a : atoms_) {
    if (!merged.empty() && merged.back().location == a.location) {
      merged.back().weight += a.weight;
    } else {
      merged.push_back(a);
    }
  }
  atoms_ = std::move(merged);
  build_prefix_sums();
}

AtomicMeasure AtomicMeasure::from_points(std::span<const double> locations, double weight) {
  std::vector<Atom> atoms;
  atoms.reserve(locations.size());
  for (double x : locations) {
    atoms.push_back({x, weight});
  }
  return AtomicMeasure(std::move(atoms));
}

void AtomicMeasure::build_prefix_sums() {
  const std::size_t n = atoms_.size();
  head_moment_.assign(n + 1, 0.0);
  tail_mass_.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    head_moment_[i + 1] = head_moment_[i] + atoms_[i].weight * atoms_[i].location;
  }
  for (std::size_t i = n; i-- > 0;) {
    tail_mass_[i] = tail_mass_[i + 1] + atoms_[i].weight;
  }
}

double AtomicMeasure::cumulative_mass(double x) const {
  const auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x,
                                   [](double v, const Atom& a) { return v < a.location; });
  const auto i = static_cast<std::size_t>(it - atoms_.begin());
  return tail_mass_[0] - tail_mass_[i];
}

double AtomicMeasure::work_to_shift(double x) const {
  if (x <= 0.0) {
    return 0.0;
  }
  const auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x,
                                   [](double v, const Atom& a) { return v < a.location; });
  const auto i = static_cast<std::size_t>(it - atoms_.begin());
  if (i == atoms_.size()) {
    return head_moment_.back();
  }
  return head_moment_[i] + x * tail_mass_[i];
}

double AtomicMeasure::shift_for_work(double y) const {
  const std::size_t n = atoms_.size();
  if (n == 0 || y <= 0.0) {
    return 0.0;
  }
  if (y >= head_moment_.back()) {
    return atoms_.back().location;
  }
  // Knot value at atom i: work_to_shift(atoms_[i].location). Find the first knot above y.
  std::size_t lo = 0;
  std::size_t hi = n - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const double knot = head_moment_[mid] + atoms_[mid].location * tail_mass_[mid];
    if (knot > y) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const double left = lo == 0 ? 0.0 : atoms_[lo - 1].location;
  const double x = (y - head_moment_[lo]) / tail_mass_[lo];
  return std::clamp(x, left, atoms_[lo].location);
}

AtomicMeasure AtomicMeasure::shifted(double x) const {
  if (x <= 0.0) {
    return *this;
  }
  AtomicMeasure out;
  const auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x,
                                   [](double v, const Atom& a) { return v < a.location; });
  out.atoms_.reserve(static_cast<std::size_t>(atoms_.end() - it));
  for (auto a = it; a != atoms_.end(); ++a) {
    out.atoms_.push_back({a->location - x, a->weight});
  }
  out.build_prefix_sums();
  return out;
}

AtomicMeasure AtomicMeasure::scaled(double factor) const {
  if (!std::isfinite(factor) || factor < 0.0) {
    throw std::invalid_argument("scaling factor must be finite and nonnegative");
  }
  if (factor == 0.0) {
    return {};
  }
  AtomicMeasure out = *this;
  for (auto& a : out.atoms_) {
    a.weight *= factor;
  }
  out.build_prefix_sums();
  return out;
}

double AtomicMeasure::integrate(const TestFunction& f) const {
  double s = 0.0;
  for (const auto& a : atoms_) {
    s += a.weight * f(a.location);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Distribution-backed measures: scale * law shifted left by offset.

namespace {

struct LawView {
  double scale;
  const DistributionSpec& law;
  double offset;

  [[nodiscard]] double mass() const { return scale * law.survival(offset); }

  [[nodiscard]] double first_moment() const { return scale * (law.mean() - law.tail_integral(offset)); }

  [[nodiscard]] double cumulative_mass(double y) const {
    if (y < 0.0) {
      return 0.0;
    }
    return scale * (law.survival(offset) - law.survival(offset + y));
  }

  [[nodiscard]] double work_to_shift(double y) const {
    if (y <= 0.0) {
      return 0.0;
    }
    return scale * (law.tail_integral(offset + y) - law.tail_integral(offset));
  }

  [[nodiscard]] ExtendedReal sup_support() const {
    if (mass() <= 0.0) {
      return 0.0;
    }
    const ExtendedReal s = law.sup_support();
    if (s.is_infinite()) {
      return s;
    }
    return std::max(0.0, s.value() - offset);
  }

  [[nodiscard]] ExtendedReal shift_for_work(double y) const {
    if (scale <= 0.0 || mass() <= 0.0 || y <= 0.0) {
      return 0.0;
    }
    if (y >= first_moment()) {
      return sup_support();
    }
    const double target = y / scale + law.tail_integral(offset);
    if (target >= law.mean()) {
      return sup_support();
    }
    return std::max(0.0, law.tail_integral_inverse(target) - offset);
  }

  [[nodiscard]] double integrate(const TestFunction& f) const {
    if (scale <= 0.0) {
      return 0.0;
    }
    switch (f.kind) {
      case TestFunction::Kind::identity:
        return first_moment();
      case TestFunction::Kind::capped:
        return work_to_shift(f.param);
      default:
        break;
    }
    if (offset == 0.0) {
      if (const auto closed = closed_form(f)) {
        return scale * *closed;
      }
    }
    return scale * quadrature(f);
  }

  // <f, law> for the bounded probes where the family admits it.
  [[nodiscard]] std::optional<double> closed_form(const TestFunction& f) const {
    const bool expo = f.kind == TestFunction::Kind::exponential;
    const double k = f.param;
    const auto& l = law.law();
    if (const auto* d = std::get_if<Deterministic>(&l)) {
      return f(d->value);
    }
    if (const auto* d = std::get_if<Uniform>(&l)) {
      const double width = d->high - d->low;
      if (expo) {
        return (std::exp(-k * d->low) - std::exp(-k * d->high)) / (k * width);
      }
      return (std::log1p(d->high) - std::log1p(d->low)) / width;
    }
    const auto exp_branch = [&](double rate) -> std::optional<double> {
      if (expo) {
        return rate / (rate + k);
      }
      if (rate > 500.0) {
        return std::nullopt;  // exp(rate) overflows; fall back to quadrature
      }
      return rate * std::exp(rate) * boost::math::expint(1, rate);
    };
    if (const auto* d = std::get_if<Exponential>(&l)) {
      return exp_branch(d->rate);
    }
    if (const auto* d = std::get_if<HyperExponential>(&l)) {
      double s = 0.0;
      for (std::size_t i = 0; i < d->probs.size(); ++i) {
        const auto v = exp_branch(d->rates[i]);
        if (!v) {
          return std::nullopt;
        }
        s += d->probs[i] * *v;
      }
      return s;
    }
    return std::nullopt;
  }

  // Integral of f(x - offset) over (offset, inf) against law, via the upper-tail quantile:
  // int_0^{S(offset)} f(Q(1 - q) - offset) dq.
  [[nodiscard]] double quadrature(const TestFunction& f) const {
    const double upper = law.survival(offset);
    if (upper <= 0.0) {
      return 0.0;
    }
    auto integrand = [&](double q) {
      const ExtendedReal x = law.quantile(std::clamp(1.0 - q, 0.0, 1.0));
      if (x.is_infinite()) {
        return f.bounded() ? 0.0 : std::numeric_limits<double>::infinity();
      }
      return f(std::max(0.0, x.value() - offset));
    };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, upper, 15, 1e-12);
  }
};

LawView view_of(const ScaledDistribution& m) { return {m.scale, m.law, 0.0}; }
LawView view_of(const ShiftedView& m) { return {m.base.scale, m.base.law, m.offset}; }

Measure zero_measure() { return AtomicMeasure{}; }

// Closed-form shift of scale * law by x, if the family is closed under shifting.
std::optional<Measure> closed_shift(double scale, const DistributionSpec& law, double x) {
  return std::visit(
      Overloaded{
          [&](const Exponential&) -> std::optional<Measure> {
            return Measure(ScaledDistribution{scale * law.survival(x), law});
          },
          [&](const Deterministic& d) -> std::optional<Measure> {
            if (x >= d.value) {
              return zero_measure();
            }
            return Measure(ScaledDistribution{scale, DistributionSpec::deterministic(d.value - x)});
          },
          [&](const Uniform& d) -> std::optional<Measure> {
            if (x >= d.high) {
              return zero_measure();
            }
            if (x < d.low) {
              return Measure(ScaledDistribution{scale, DistributionSpec::uniform(d.low - x, d.high - x)});
            }
            return Measure(ScaledDistribution{scale * law.survival(x), DistributionSpec::uniform(0.0, d.high - x)});
          },
          [&](const HyperExponential& d) -> std::optional<Measure> {
            std::vector<double> probs(d.probs.size());
            double total = 0.0;
            for (std::size_t i = 0; i < probs.size(); ++i) {
              probs[i] = d.probs[i] * std::exp(-d.rates[i] * x);
              total += probs[i];
            }
            if (total <= 0.0) {
              return zero_measure();
            }
            for (auto& p : probs) {
              p /= total;
            }
            return Measure(ScaledDistribution{scale * total, DistributionSpec::hyperexponential(probs, d.rates)});
          },
          [](const auto&) -> std::optional<Measure> { return std::nullopt; },
      },
      law.law());
}

}  // namespace

double total_mass(const Measure& m) {
  return std::visit(Overloaded{
                        [](const AtomicMeasure& a) { return a.total_mass(); },
                        [](const auto& d) { return view_of(d).mass(); },
                    },
                    m);
}

double first_moment(const Measure& m) {
  return std::visit(Overloaded{
                        [](const AtomicMeasure& a) { return a.first_moment(); },
                        [](const auto& d) { return view_of(d).first_moment(); },
                    },
                    m);
}

double cumulative_mass(const Measure& m, double x) {
  return std::visit(Overloaded{
                        [&](const AtomicMeasure& a) { return a.cumulative_mass(x); },
                        [&](const auto& d) { return view_of(d).cumulative_mass(x); },
                    },
                    m);
}

double work_to_shift(const Measure& m, double x) {
  return std::visit(Overloaded{
                        [&](const AtomicMeasure& a) { return a.work_to_shift(x); },
                        [&](const auto& d) { return view_of(d).work_to_shift(x); },
                    },
                    m);
}

ExtendedReal shift_for_work(const Measure& m, double y) {
  return std::visit(Overloaded{
                        [&](const AtomicMeasure& a) { return ExtendedReal(a.shift_for_work(y)); },
                        [&](const auto& d) { return view_of(d).shift_for_work(y); },
                    },
                    m);
}

ExtendedReal sup_support(const Measure& m) {
  return std::visit(Overloaded{
                        [](const AtomicMeasure& a) { return ExtendedReal(a.sup_support()); },
                        [](const auto& d) { return view_of(d).sup_support(); },
                    },
                    m);
}

double integrate(const Measure& m, const TestFunction& f) {
  return std::visit(Overloaded{
                        [&](const AtomicMeasure& a) { return a.integrate(f); },
                        [&](const auto& d) { return view_of(d).integrate(f); },
                    },
                    m);
}

bool is_zero(const Measure& m) { return total_mass(m) <= 0.0; }

Measure shift_truncate(const Measure& m, double x) {
  if (x <= 0.0) {
    return m;
  }
  return std::visit(Overloaded{
                        [&](const AtomicMeasure& a) -> Measure { return a.shifted(x); },
                        [&](const ScaledDistribution& d) -> Measure {
                          if (d.scale <= 0.0) {
                            return zero_measure();
                          }
                          if (auto closed = closed_shift(d.scale, d.law, x)) {
                            return *std::move(closed);
                          }
                          return ShiftedView{d, x};
                        },
                        [&](const ShiftedView& v) -> Measure {
                          if (v.base.scale <= 0.0) {
                            return zero_measure();
                          }
                          return ShiftedView{v.base, v.offset + x};
                        },
                    },
                    m);
}

AtomicMeasure shift_truncate_discretized(const ScaledDistribution& m, double x, DiscretizationGrid grid) {
  if (grid.atoms == 0) {
    throw std::invalid_argument("discretization grid needs at least one atom");
  }
  x = std::max(0.0, x);
  const double tail = m.law.survival(x);
  if (m.scale <= 0.0 || tail <= 0.0) {
    return {};
  }
  const double base = m.law.cdf(x);
  const double weight = m.scale * tail / static_cast<double>(grid.atoms);
  std::vector<Atom> atoms;
  atoms.reserve(grid.atoms);
  for (std::size_t i = 0; i < grid.atoms; ++i) {
    const double u = base + (static_cast<double>(i) + 0.5) / static_cast<double>(grid.atoms) * tail;
    const double loc = m.law.quantile(std::min(u, 1.0)).value() - x;
    if (loc > 0.0) {
      atoms.push_back({loc, weight});
    }
  }
  return AtomicMeasure(std::move(atoms));
}

double discrepancy(const Measure& a, const Measure& b, const TestFunctionSet& set) {
  double worst = 0.0;
  for (const auto& f : set.functions()) {
    worst = std::max(worst, std::abs(integrate(a, f) - integrate(b, f)));
  }
  return worst;
}

}  // namespace gps
