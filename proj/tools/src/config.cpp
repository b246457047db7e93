#include "gps_cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <string_view>

namespace gps::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw SchemaError(where + ": " + what);
}

void require_object(const json& node, const std::string& where) {
  if (!node.is_object()) {
    fail(where, "expected an object");
  }
}

void check_keys(const json& node, std::initializer_list<std::string_view> allowed, const std::string& where) {
  require_object(node, where);
  for (const auto& [key, value] : node.items()) {
    bool known = false;
    for (auto a : allowed) {
      known = known || key == a;
    }
    if (!known) {
      fail(where, "unknown key '" + key + "'");
    }
  }
}

double number(const json& node, const std::string& key, const std::string& where) {
  if (!node.contains(key)) {
    fail(where, "missing '" + key + "'");
  }
  const json& v = node.at(key);
  if (!v.is_number()) {
    fail(where + "." + key, "expected a number");
  }
  const double d = v.get<double>();
  if (!std::isfinite(d)) {
    fail(where + "." + key, "must be finite");
  }
  return d;
}

std::optional<double> optional_number(const json& node, const std::string& key, const std::string& where) {
  if (!node.contains(key)) {
    return std::nullopt;
  }
  return number(node, key, where);
}

bool boolean(const json& node, const std::string& key, const std::string& where, bool fallback) {
  if (!node.contains(key)) {
    return fallback;
  }
  if (!node.at(key).is_boolean()) {
    fail(where + "." + key, "expected true or false");
  }
  return node.at(key).get<bool>();
}

std::uint64_t unsigned_integer(const json& v, const std::string& where) {
  if (!v.is_number_unsigned()) {
    fail(where, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<double> number_list(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) {
    fail(where, "expected a nonempty array of numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
      fail(where + "[" + std::to_string(i) + "]", "expected a finite number");
    }
    out.push_back(v[i].get<double>());
  }
  return out;
}

template <class F>
auto guarded(const std::string& where, F&& build) {
  try {
    return build();
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
}

Delay parse_delay(const json& node, const std::string& where) {
  if (node.is_string()) {
    const auto s = node.get<std::string>();
    if (s == "none") {
      return NoDelay{};
    }
    if (s == "equilibrium") {
      return EquilibriumDelay{};
    }
    fail(where, "expected \"none\", \"equilibrium\" or {\"fixed\": d}");
  }
  check_keys(node, {"fixed"}, where);
  const double d = number(node, "fixed", where);
  if (!(d > 0.0)) {
    fail(where + ".fixed", "first arrival offset must be positive");
  }
  return FixedDelay{d};
}

AtomicMeasure parse_atoms(const json& node, const std::string& where) {
  if (!node.is_array()) {
    fail(where, "expected an array of [location, weight] pairs");
  }
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const json& a = node[i];
    const std::string at = where + "[" + std::to_string(i) + "]";
    if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
      fail(at, "expected [location, weight]");
    }
    atoms.push_back({a[0].get<double>(), a[1].get<double>()});
  }
  return guarded(where, [&] { return AtomicMeasure(std::move(atoms)); });
}

// {"z0", "family", "params"} or {"atoms": [...]}
std::variant<InitialConditionSpec, AtomicMeasure> parse_initial(const json& node, const std::string& where) {
  require_object(node, where);
  if (node.contains("atoms")) {
    check_keys(node, {"atoms"}, where);
    return parse_atoms(node.at("atoms"), where + ".atoms");
  }
  check_keys(node, {"z0", "family", "params"}, where);
  const double z0 = number(node, "z0", where);
  if (z0 < 0.0) {
    fail(where + ".z0", "must be nonnegative");
  }
  if (!node.contains("family")) {
    if (z0 > 0.0) {
      fail(where, "missing 'family'");
    }
    return InitialConditionSpec{};
  }
  json law = json::object();
  law["family"] = node.at("family");
  if (node.contains("params")) {
    law["params"] = node.at("params");
  }
  return InitialConditionSpec{z0, parse_distribution(law, where)};
}

Measure parse_xi(const json& node, const std::string& where) {
  const auto initial = parse_initial(node, where);
  if (const auto* ic = std::get_if<InitialConditionSpec>(&initial)) {
    if (ic->base_count == 0.0) {
      return AtomicMeasure{};
    }
    return ScaledDistribution{ic->base_count, ic->service_law};
  }
  return std::get<AtomicMeasure>(initial);
}

FluidParams derived_fluid(const RunConfig& rc) {
  FluidParams p;
  p.alpha = rc.sim.arrivals.rate();
  p.nu = rc.sim.service;
  if (const auto* ic = std::get_if<InitialConditionSpec>(&rc.sim.initial)) {
    if (ic->base_count > 0.0) {
      p.xi = ScaledDistribution{ic->base_count, ic->service_law};
    }
  } else {
    p.xi = std::get<AtomicMeasure>(rc.sim.initial).scaled(1.0 / rc.sim.scale);
  }
  return p;
}

}  // namespace

std::string config_hash(const json& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

DistributionSpec parse_distribution(const json& node, const std::string& where) {
  check_keys(node, {"family", "params"}, where);
  if (!node.contains("family") || !node.at("family").is_string()) {
    fail(where, "missing string 'family'");
  }
  const auto name = node.at("family").get<std::string>();
  const Family family = guarded(where + ".family", [&] { return parse_family(name); });
  const json params = node.contains("params") ? node.at("params") : json::object();
  const std::string at = where + ".params";
  return guarded(at, [&]() -> DistributionSpec {
    switch (family) {
      case Family::exponential:
        check_keys(params, {"rate"}, at);
        return DistributionSpec::exponential(number(params, "rate", at));
      case Family::deterministic:
        check_keys(params, {"value"}, at);
        return DistributionSpec::deterministic(number(params, "value", at));
      case Family::uniform:
        check_keys(params, {"low", "high"}, at);
        return DistributionSpec::uniform(number(params, "low", at), number(params, "high", at));
      case Family::pareto:
        check_keys(params, {"scale", "shape"}, at);
        return DistributionSpec::pareto(number(params, "scale", at), number(params, "shape", at));
      case Family::hyperexponential:
        check_keys(params, {"probs", "rates"}, at);
        if (!params.contains("probs") || !params.contains("rates")) {
          fail(at, "needs 'probs' and 'rates'");
        }
        return DistributionSpec::hyperexponential(number_list(params.at("probs"), at + ".probs"),
                                                  number_list(params.at("rates"), at + ".rates"));
      case Family::lognormal:
        check_keys(params, {"mu", "sigma"}, at);
        return DistributionSpec::lognormal(number(params, "mu", at), number(params, "sigma", at));
    }
    fail(at, "unsupported family");
  });
}

std::vector<double> parse_grid(const json& node, const std::string& where) {
  std::vector<double> grid;
  if (node.is_array()) {
    grid = number_list(node, where);
  } else {
    check_keys(node, {"start", "stop", "step"}, where);
    const double start = number(node, "start", where);
    const double stop = number(node, "stop", where);
    const double step = number(node, "step", where);
    if (!(step > 0.0) || stop < start) {
      fail(where, "needs step > 0 and stop >= start");
    }
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step * (1.0 + 1e-12)));
    if (n > 10'000'000) {
      fail(where, "more than 10^7 grid points");
    }
    for (std::size_t i = 0; i <= n; ++i) {
      grid.push_back(start + static_cast<double>(i) * step);
    }
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0) {
      fail(where, "grid points must be nonnegative");
    }
  }
  return grid;
}

RunConfig parse_config(const json& doc) {
  check_keys(doc,
             {"arrivals", "service", "initial", "scale", "horizon", "grid", "seed", "critical", "scales",
              "replications", "fluid", "reference", "exclusion_radius", "score_near_multiples", "test_set", "check"},
             "config");
  RunConfig rc;
  rc.source = doc;
  rc.hash = config_hash(doc);

  if (doc.contains("arrivals")) {
    const json& a = doc.at("arrivals");
    check_keys(a, {"family", "params", "delay"}, "arrivals");
    json law = a;
    law.erase("delay");
    rc.sim.arrivals.interarrival = parse_distribution(law, "arrivals");
    if (a.contains("delay")) {
      rc.sim.arrivals.delay = parse_delay(a.at("delay"), "arrivals.delay");
    }
  }
  if (doc.contains("service")) {
    rc.sim.service = parse_distribution(doc.at("service"), "service");
  }
  rc.sim.initial = doc.contains("initial") ? parse_initial(doc.at("initial"), "initial")
                                           : std::variant<InitialConditionSpec, AtomicMeasure>{AtomicMeasure{}};
  if (const auto* atoms = std::get_if<AtomicMeasure>(&rc.sim.initial)) {
    for (const auto& a : atoms->atoms()) {
      if (a.weight != std::round(a.weight)) {
        fail("initial.atoms", "weights are job counts and must be whole numbers");
      }
    }
  }
  if (const auto scale = optional_number(doc, "scale", "config")) {
    if (!(*scale > 0.0)) {
      fail("scale", "must be positive");
    }
    rc.sim.scale = *scale;
  }
  if (const auto horizon = optional_number(doc, "horizon", "config")) {
    if (!(*horizon > 0.0)) {
      fail("horizon", "must be positive");
    }
    rc.sim.horizon = *horizon;
  } else {
    rc.sim.horizon = 0.0;
  }
  if (doc.contains("grid")) {
    rc.grid = parse_grid(doc.at("grid"), "grid");
  }
  if (doc.contains("seed")) {
    rc.seed = unsigned_integer(doc.at("seed"), "seed");
  }
  rc.sim.seed = rc.seed;
  rc.critical = boolean(doc, "critical", "config", false);

  if (doc.contains("test_set")) {
    const json& ts = doc.at("test_set");
    if (!ts.is_array() || ts.empty()) {
      fail("test_set", "expected a nonempty array of tags");
    }
    std::vector<TestFunction> fns;
    for (const auto& tag : ts) {
      if (!tag.is_string()) {
        fail("test_set", "tags are strings such as \"min:0.5\"");
      }
      fns.push_back(guarded("test_set", [&] { return TestFunction::parse(tag.get<std::string>()); }));
    }
    rc.tests = TestFunctionSet(std::move(fns));
  }

  if (doc.contains("fluid")) {
    const json& f = doc.at("fluid");
    check_keys(f, {"alpha", "nu", "xi"}, "fluid");
    FluidParams p = derived_fluid(rc);
    p.alpha = number(f, "alpha", "fluid");
    if (!(p.alpha > 0.0)) {
      fail("fluid.alpha", "must be positive");
    }
    if (!f.contains("nu")) {
      fail("fluid", "missing 'nu'");
    }
    p.nu = parse_distribution(f.at("nu"), "fluid.nu");
    if (f.contains("xi")) {
      p.xi = parse_xi(f.at("xi"), "fluid.xi");
    }
    rc.fluid = std::move(p);
  } else if (doc.contains("arrivals") || doc.contains("service") || doc.contains("initial")) {
    rc.fluid = derived_fluid(rc);
  }

  if (doc.contains("check")) {
    const json& c = doc.at("check");
    check_keys(c, {"required_ratio", "monotone_slack", "workload_bound"}, "check");
    rc.rule.required_ratio = optional_number(c, "required_ratio", "check").value_or(rc.rule.required_ratio);
    rc.rule.monotone_slack = optional_number(c, "monotone_slack", "check").value_or(rc.rule.monotone_slack);
    rc.rule.workload_bound = optional_number(c, "workload_bound", "check");
  }

  if (doc.contains("scales")) {
    ScalingConfig sc;
    sc.scales = number_list(doc.at("scales"), "scales");
    for (std::size_t i = 0; i < sc.scales.size(); ++i) {
      if (!(sc.scales[i] > 0.0) || (i > 0 && sc.scales[i] <= sc.scales[i - 1])) {
        fail("scales", "must be positive and strictly increasing");
      }
    }
    sc.replications = doc.contains("replications") ? unsigned_integer(doc.at("replications"), "replications") : 1;
    if (sc.replications == 0) {
      fail("replications", "must be at least 1");
    }
    if (!rc.fluid) {
      fail("config", "a sweep needs 'fluid' or the arrivals/service/initial blocks to derive it");
    }
    sc.base = rc.sim;
    sc.fluid = *rc.fluid;
    if (rc.grid.empty()) {
      fail("config", "a sweep needs 'grid' (fluid time)");
    }
    sc.time_grid = rc.grid;
    if (doc.contains("reference")) {
      const json& ref = doc.at("reference");
      if (ref == "idealized") {
        sc.reference = FluidReference::idealized;
      } else if (ref == "per_replication") {
        sc.reference = FluidReference::per_replication;
      } else {
        fail("reference", "expected \"idealized\" or \"per_replication\"");
      }
    }
    if (const auto eps = optional_number(doc, "exclusion_radius", "config")) {
      if (*eps < 0.0) {
        fail("exclusion_radius", "must be nonnegative");
      }
      sc.exclusion_radius = eps;
    }
    sc.score_near_multiples = boolean(doc, "score_near_multiples", "config", false);
    if (!rc.tests.has_first_moment_probe()) {
      fail("test_set", "must include \"identity\" (the first-moment probe)");
    }
    sc.tests = rc.tests;
    sc.seed = rc.seed;
    rc.scaling = std::move(sc);
  } else {
    for (const char* key : {"replications", "reference", "exclusion_radius", "score_near_multiples", "check"}) {
      if (doc.contains(key)) {
        fail(key, "only meaningful together with 'scales'");
      }
    }
  }
  return rc;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw SchemaError("cannot open config file " + path.string());
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

void apply_seed_override(RunConfig& rc, std::uint64_t seed) {
  rc.seed_override = seed;
  rc.seed = seed;
  rc.sim.seed = seed;
  if (rc.scaling) {
    rc.scaling->seed = seed;
    rc.scaling->base.seed = seed;
  }
}

}  // namespace gps::cli
