#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gps/trace_io.hpp"
#include "gps_cli/commands.hpp"
#include "gps_cli/config.hpp"

namespace gps::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gps_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const json& doc) {
  const fs::path path = dir / "config.json";
  std::ofstream(path) << doc.dump(2);
  return path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> data_rows(const fs::path& p) {
  std::vector<std::string> rows;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') {
      rows.push_back(line);
    }
  }
  return rows;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gps");
  std::vector<const char*> argv;
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

json dd1() {
  return json::parse(R"({
    "arrivals": {"family": "deterministic", "params": {"value": 1}, "delay": {"fixed": 1}},
    "service": {"family": "deterministic", "params": {"value": 1}},
    "initial": {"atoms": [[1, 1]]},
    "horizon": 3.5,
    "grid": [0, 0.5, 1, 3.5],
    "seed": 1
  })");
}

json small_sweep() {
  return json::parse(R"({
    "arrivals": {"family": "exponential", "params": {"rate": 1}},
    "service": {"family": "exponential", "params": {"rate": 1}},
    "initial": {"z0": 1, "family": "exponential", "params": {"rate": 1}},
    "scales": [5, 20],
    "replications": 3,
    "grid": {"start": 0.25, "stop": 1.75, "step": 0.5},
    "seed": 7
  })");
}

TEST(Config, ParsesFullDocument) {
  json doc = small_sweep();
  doc["test_set"] = {"min:1", "identity"};
  doc["reference"] = "per_replication";
  doc["exclusion_radius"] = 0.1;
  doc["check"] = {{"workload_bound", 0.2}};
  const RunConfig rc = parse_config(doc);
  ASSERT_TRUE(rc.scaling.has_value());
  EXPECT_EQ(rc.scaling->scales, (std::vector<double>{5, 20}));
  EXPECT_EQ(rc.scaling->replications, 3u);
  EXPECT_EQ(rc.grid, (std::vector<double>{0.25, 0.75, 1.25, 1.75}));
  EXPECT_EQ(rc.scaling->reference, FluidReference::per_replication);
  EXPECT_EQ(rc.scaling->exclusion_radius, 0.1);
  EXPECT_EQ(rc.tests.size(), 2u);
  EXPECT_EQ(rc.rule.workload_bound, 0.2);
  ASSERT_TRUE(rc.fluid.has_value());
  EXPECT_EQ(rc.fluid->alpha, 1.0);
  EXPECT_DOUBLE_EQ(rc.fluid->workload(), 1.0);
  EXPECT_EQ(rc.seed, 7u);
}

TEST(Config, RejectsSchemaViolations) {
  auto rejects = [](const json& doc) {
    EXPECT_THROW(parse_config(doc), SchemaError) << doc.dump();
  };
  json doc = dd1();
  doc["horizn"] = 3;
  rejects(doc);

  doc = dd1();
  doc["service"]["params"]["rate"] = 1;
  rejects(doc);

  doc = dd1();
  doc["service"]["family"] = "weibull";
  rejects(doc);

  doc = dd1();
  doc["arrivals"]["delay"] = "sometimes";
  rejects(doc);

  doc = dd1();
  doc["arrivals"]["delay"] = {{"fixed", 0}};
  rejects(doc);

  doc = dd1();
  doc["initial"] = {{"atoms", {{1, 0.5}}}};
  rejects(doc);

  doc = dd1();
  doc["seed"] = -3;
  rejects(doc);

  doc = dd1();
  doc["service"] = {{"family", "pareto"}, {"params", {{"scale", 1}, {"shape", 0.9}}}};
  rejects(doc);

  doc = dd1();
  doc["replications"] = 4;
  rejects(doc);

  doc = small_sweep();
  doc["scales"] = {20, 5};
  rejects(doc);

  doc = small_sweep();
  doc["test_set"] = {"min:1"};
  rejects(doc);

  doc = small_sweep();
  doc["grid"] = {{"start", 0}, {"stop", 1}, {"step", 0}};
  rejects(doc);
}

TEST(Config, HashIsStableAndSensitive) {
  const json a = dd1();
  json b = dd1();
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b["seed"] = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, SeedOverrideReachesEveryStream) {
  RunConfig rc = parse_config(small_sweep());
  apply_seed_override(rc, 99);
  EXPECT_EQ(rc.sim.seed, 99u);
  EXPECT_EQ(rc.scaling->seed, 99u);
  EXPECT_EQ(rc.seed_override, 99u);
  EXPECT_EQ(rc.hash, config_hash(small_sweep()));
}

TEST(Simulate, DeterministicHandTrace) {
  const fs::path dir = scratch("dd1");
  const auto res = cli({"simulate", "--config", write_config(dir, dd1()).string(), "--out", (dir / "out").string()});
  ASSERT_EQ(res.code, kOk) << res.err;
  EXPECT_EQ(data_rows(dir / "out" / "batches.csv"),
            (std::vector<std::string>{"k,beta,work,completion,next_beta,size", "0,0,1,1,1,1", "1,1,1,2,2,1",
                                      "2,2,1,3,3,1", "3,3,1,4,inf,1"}));
  const auto jobs = data_rows(dir / "out" / "jobs.csv");
  ASSERT_EQ(jobs.size(), 5u);
  EXPECT_EQ(jobs[1], "0,0,1,0,1,1,0");
  const auto snaps = data_rows(dir / "out" / "snapshots.csv");
  ASSERT_EQ(snaps.size(), 5u);
  EXPECT_EQ(snaps[2].substr(0, 10), "0.5,0.5,1,");

  const std::string header = slurp(dir / "out" / "jobs.csv");
  EXPECT_EQ(header.rfind("# gps ", 0), 0u);
  EXPECT_NE(header.find("# config " + config_hash(dd1())), std::string::npos);

  const auto inspect = cli({"inspect", "--trace", (dir / "out").string()});
  ASSERT_EQ(inspect.code, kOk);
  const json summary = json::parse(inspect.out);
  EXPECT_EQ(summary["batches"], 4);
  EXPECT_EQ(summary["completed"], 3);
  EXPECT_EQ(summary["mean_sojourn"], 1.0);
}

TEST(Simulate, EmptySystemWritesValidFiles) {
  const fs::path dir = scratch("empty");
  const json doc = json::parse(R"({
    "arrivals": {"family": "deterministic", "params": {"value": 10}, "delay": {"fixed": 100}},
    "service": {"family": "exponential", "params": {"rate": 1}},
    "horizon": 5
  })");
  const auto res = cli({"simulate", "--config", write_config(dir, doc).string(), "--out", (dir / "out").string()});
  ASSERT_EQ(res.code, kOk) << res.err;
  std::ifstream in(dir / "out" / "jobs.csv");
  EXPECT_TRUE(io::read_jobs_csv(in).empty());
  EXPECT_EQ(data_rows(dir / "out" / "batches.csv").size(), 2u);
}

TEST(Simulate, ExitCodes) {
  const fs::path dir = scratch("codes");
  json doc = dd1();
  doc["servise"] = doc["service"];
  EXPECT_EQ(cli({"simulate", "--config", write_config(dir, doc).string(), "--out", dir.string()}).code, kSchemaError);

  doc = dd1();
  doc.erase("horizon");
  EXPECT_EQ(cli({"simulate", "--config", write_config(dir, doc).string(), "--out", dir.string()}).code, kSchemaError);

  doc = dd1();
  doc["grid"] = {0, 4};
  EXPECT_EQ(cli({"simulate", "--config", write_config(dir, doc).string(), "--out", dir.string()}).code, kSchemaError);

  std::ofstream(dir / "blocker") << "x";
  const auto blocked =
      cli({"simulate", "--config", write_config(dir, dd1()).string(), "--out", (dir / "blocker" / "sub").string()});
  EXPECT_EQ(blocked.code, kRuntimeError);

  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_EQ(cli({"simulate", "--config", (dir / "broken.json").string()}).code, kSchemaError);
  EXPECT_EQ(cli({"simulate"}).code, kSchemaError);
  EXPECT_EQ(cli({"--help"}).code, kOk);
  EXPECT_EQ(cli({"inspect", "--trace", (dir / "nowhere").string()}).code, kRuntimeError);
}

TEST(Simulate, SeedOverrideIsLoggedAndRecorded) {
  const fs::path dir = scratch("override");
  json doc = small_sweep();
  for (const char* key : {"scales", "replications"}) {
    doc.erase(key);
  }
  doc["horizon"] = 20;
  doc["grid"] = {1, 2};
  const fs::path cfg = write_config(dir, doc);

  ::setenv("GPS_SEED_OVERRIDE", "12345", 1);
  const auto res = cli({"simulate", "--config", cfg.string(), "--out", (dir / "a").string()});
  ::setenv("GPS_SEED_OVERRIDE", "12x", 1);
  const auto bad = cli({"simulate", "--config", cfg.string(), "--out", (dir / "b").string()});
  ::unsetenv("GPS_SEED_OVERRIDE");

  ASSERT_EQ(res.code, kOk) << res.err;
  EXPECT_NE(res.err.find("WARNING: GPS_SEED_OVERRIDE=12345"), std::string::npos);
  EXPECT_NE(slurp(dir / "a" / "jobs.csv").find("# seed 12345 (GPS_SEED_OVERRIDE)"), std::string::npos);
  EXPECT_EQ(bad.code, kSchemaError);

  const auto plain = cli({"simulate", "--config", cfg.string(), "--out", (dir / "c").string()});
  ASSERT_EQ(plain.code, kOk);
  EXPECT_NE(slurp(dir / "a" / "jobs.csv"), slurp(dir / "c" / "jobs.csv"));
}

TEST(Simulate, RerunsAreByteIdentical) {
  const fs::path dir = scratch("rerun_sim");
  json doc = small_sweep();
  doc.erase("scales");
  doc.erase("replications");
  doc["horizon"] = 50;
  doc["grid"] = {{"start", 0}, {"stop", 50}, {"step", 0.5}};
  const fs::path cfg = write_config(dir, doc);
  ASSERT_EQ(cli({"simulate", "--config", cfg.string(), "--out", (dir / "a").string()}).code, kOk);
  ASSERT_EQ(cli({"simulate", "--config", cfg.string(), "--out", (dir / "b").string()}).code, kOk);
  for (const char* f : {"jobs.csv", "batches.csv", "snapshots.csv"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
}

TEST(Fluid, ExponentialQueueLengthIsFlat) {
  const fs::path dir = scratch("fluid");
  const json doc = json::parse(R"({
    "fluid": {"alpha": 1, "nu": {"family": "exponential", "params": {"rate": 1}},
              "xi": {"z0": 1, "family": "exponential", "params": {"rate": 1}}},
    "grid": [0, 0.5, 1, 1.5]
  })");
  ASSERT_EQ(cli({"fluid", "--config", write_config(dir, doc).string(), "--out", dir.string()}).code, kOk);
  const auto rows = data_rows(dir / "fluid.csv");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], "t,sigma_mass,sigma_work,mu_mass,mu_work,queue_length,residue,workload");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::vector<std::string> cols;
    std::stringstream ss(rows[i]);
    for (std::string c; std::getline(ss, c, ',');) {
      cols.push_back(c);
    }
    ASSERT_EQ(cols.size(), 8u);
    EXPECT_NEAR(std::stod(cols[5]), 1.0, 1e-12) << rows[i];
    EXPECT_EQ(cols[7], "1");
  }
}

TEST(Fluid, ZeroInitialConditionGivesZeroColumns) {
  const fs::path dir = scratch("fluid_zero");
  const json doc = json::parse(R"({
    "fluid": {"alpha": 1, "nu": {"family": "exponential", "params": {"rate": 1}}, "xi": {"z0": 0}},
    "grid": [0, 0.5, 7]
  })");
  ASSERT_EQ(cli({"fluid", "--config", write_config(dir, doc).string(), "--out", dir.string()}).code, kOk);
  const auto rows = data_rows(dir / "fluid.csv");
  EXPECT_EQ(rows[1], "0,0,0,0,0,0,0,0");
  EXPECT_EQ(rows[3], "7,0,0,0,0,0,0,0");
}

TEST(Converge, WritesReportAndCsv) {
  const fs::path dir = scratch("converge");
  const auto res = cli({"converge", "--config", write_config(dir, small_sweep()).string(), "--out", dir.string(),
                        "--jobs", "2"});
  ASSERT_TRUE(res.code == kOk || res.code == kCheckFailed) << res.err;
  const json report = json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(report["scales"].size(), 2u);
  EXPECT_EQ(report["config_hash"], config_hash(small_sweep()));
  EXPECT_EQ(report["scales"][0]["seeds"].size(), 3u);
  EXPECT_EQ(report["check"]["passed"], res.code == kOk);
  EXPECT_TRUE(report.contains("timing"));
  const auto rows = data_rows(dir / "convergence.csv");
  EXPECT_EQ(rows[0], "r,t,f_tag,mean_abs_err,max_abs_err");
  EXPECT_EQ(rows.size(), 1u + 2u * 4u * 2u * TestFunctionSet::defaults().size());
}

TEST(Converge, SingleScaleIsSchemaError) {
  const fs::path dir = scratch("single");
  json doc = small_sweep();
  doc["scales"] = {5};
  EXPECT_EQ(cli({"converge", "--config", write_config(dir, doc).string(), "--out", dir.string()}).code,
            kSchemaError);
}

TEST(Converge, FlatReportFailsTheCheck) {
  const fs::path dir = scratch("flat");
  const RunConfig rc = parse_config(small_sweep());
  ConvergenceReport flat;
  for (double r : {50.0, 200.0, 800.0}) {
    ScaleSummary s;
    s.r = r;
    s.aggregate = 0.3;
    flat.scales.push_back(s);
  }
  std::ostringstream err;
  EXPECT_EQ(finish_converge(flat, rc, dir, {}, Log(err, false)), kCheckFailed);
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "convergence.csv"));
  EXPECT_NE(err.str().find("FAIL"), std::string::npos);
}

TEST(Converge, RerunsAreIdenticalExceptTiming) {
  const fs::path dir = scratch("rerun_converge");
  const fs::path cfg = write_config(dir, small_sweep());
  ASSERT_NE(cli({"converge", "--config", cfg.string(), "--out", (dir / "a").string(), "--jobs", "1"}).code,
            kRuntimeError);
  ASSERT_NE(cli({"converge", "--config", cfg.string(), "--out", (dir / "b").string(), "--jobs", "3"}).code,
            kRuntimeError);
  EXPECT_EQ(slurp(dir / "a" / "convergence.csv"), slurp(dir / "b" / "convergence.csv"));
  json a = json::parse(slurp(dir / "a" / "report.json"));
  json b = json::parse(slurp(dir / "b" / "report.json"));
  a.erase("timing");
  b.erase("timing");
  EXPECT_EQ(a.dump(), b.dump());
}

}  // namespace
}  // namespace gps::cli
