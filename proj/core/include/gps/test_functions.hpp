#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gps {

// One probe used to compare measures: x -> min(x, a), exp(-k x), 1 / (1 + x), or x itself.
struct TestFunction {
  enum class Kind { capped, exponential, rational, identity };

  Kind kind = Kind::identity;
  double param = 0.0;

  static TestFunction capped(double a) { return {Kind::capped, a}; }
  static TestFunction exponential(double k) { return {Kind::exponential, k}; }
  static TestFunction rational() { return {Kind::rational, 0.0}; }
  static TestFunction identity() { return {Kind::identity, 0.0}; }

  // Inverse of tag(): "min:<a>", "exp:<k>", "rational", "identity".
  static TestFunction parse(std::string_view tag);

  [[nodiscard]] double operator()(double x) const;
  [[nodiscard]] std::string tag() const;
  [[nodiscard]] bool bounded() const { return kind != Kind::identity; }

  bool operator==(const TestFunction&) const = default;
};

class TestFunctionSet {
 public:
  TestFunctionSet() = default;
  explicit TestFunctionSet(std::vector<TestFunction> functions);

  // min(x, a) for a in {0.25, 0.5, 1, 2, 4, 8}, exp(-k x) for k in {0.5, 1, 2}, 1/(1+x), and x.
  static TestFunctionSet defaults();

  [[nodiscard]] const std::vector<TestFunction>& functions() const { return functions_; }
  [[nodiscard]] std::size_t size() const { return functions_.size(); }
  [[nodiscard]] bool has_first_moment_probe() const;
  [[nodiscard]] std::vector<std::string> tags() const;

 private:
  std::vector<TestFunction> functions_;
};

}  // namespace gps
