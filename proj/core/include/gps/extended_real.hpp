#pragma once

#include <limits>
#include <stdexcept>

namespace gps {

// A nonnegative real that may also be +infinity, as returned for the upper end of an
// unbounded support. Reading the numeric value of the infinite case is an error.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double value) : value_(value) {}  // NOLINT(google-explicit-constructor)

  static constexpr ExtendedReal infinity() {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  [[nodiscard]] constexpr bool is_infinite() const { return infinite_; }
  [[nodiscard]] constexpr bool is_finite() const { return !infinite_; }

  [[nodiscard]] double value() const {
    if (infinite_) {
      throw std::domain_error("arithmetic on the +infinity support sentinel");
    }
    return value_;
  }

  // Finite value, or `fallback` for the sentinel.
  [[nodiscard]] constexpr double value_or(double fallback) const { return infinite_ ? fallback : value_; }

  friend constexpr bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.infinite_ || b.infinite_) {
      return a.infinite_ == b.infinite_;
    }
    return a.value_ == b.value_;
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

}  // namespace gps
