#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gps/fluid.hpp"
#include "gps/harness.hpp"
#include "gps/simulator.hpp"
#include "gps/test_functions.hpp"

namespace gps::cli {

// Bad config document: unknown key, missing field, wrong type or invalid parameter.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  nlohmann::json source;
  std::string hash;  // 16 hex digits

  SimConfig sim;  // horizon is 0 when the document has none
  std::vector<double> grid;
  bool critical = false;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> seed_override;

  // Given explicitly or derived from arrivals, service and initial.
  std::optional<FluidParams> fluid;
  TestFunctionSet tests = TestFunctionSet::defaults();

  // Present when the document has `scales`.
  std::optional<ScalingConfig> scaling;
  ConvergenceRule rule;
};

std::string config_hash(const nlohmann::json& doc);

// Throws SchemaError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

// Replaces the seed everywhere it is used; the hash still identifies the document.
void apply_seed_override(RunConfig& rc, std::uint64_t seed);

DistributionSpec parse_distribution(const nlohmann::json& node, const std::string& where);
std::vector<double> parse_grid(const nlohmann::json& node, const std::string& where);

}  // namespace gps::cli
