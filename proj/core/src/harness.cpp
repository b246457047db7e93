#include "gps/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

namespace gps {

namespace {

struct ReplicationResult {
  std::uint64_t seed = 0;
  double aggregate = 0.0;
  double workload_sup_error = 0.0;
  std::size_t jobs = 0;
  // [kept time][function] absolute errors
  std::vector<std::vector<double>> sigma_err;
  std::vector<std::vector<double>> mu_err;
};

void validate(const ScalingConfig& cfg) {
  if (cfg.scales.empty()) {
    throw std::invalid_argument("scaling config needs at least one scale");
  }
  for (std::size_t i = 0; i < cfg.scales.size(); ++i) {
    if (!(cfg.scales[i] > 0.0) || (i > 0 && cfg.scales[i] <= cfg.scales[i - 1])) {
      throw std::invalid_argument("scales must be positive and strictly increasing");
    }
  }
  if (cfg.replications == 0) {
    throw std::invalid_argument("need at least one replication per scale");
  }
  if (cfg.time_grid.empty()) {
    throw std::invalid_argument("time grid is empty");
  }
  for (double t : cfg.time_grid) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw std::invalid_argument("time grid points must be finite and nonnegative");
    }
  }
  if (!cfg.tests.has_first_moment_probe()) {
    throw std::invalid_argument("test function set must include the first-moment probe");
  }
}

}  // namespace

ScaledSnapshot scaled_snapshot(const Trace& trace, double r, double t) {
  if (!(r > 0.0)) {
    throw std::invalid_argument("scale must be positive");
  }
  const double real_time = r * t;
  if (real_time > trace.horizon()) {
    throw std::out_of_range("scaled time beyond the trace horizon");
  }
  const SimState s = trace.snapshot(real_time);
  const double inv = 1.0 / r;
  return {s.sigma.scaled(inv), s.mu.scaled(inv), s.workload * inv};
}

bool is_kept_time(double t, double w, double radius) {
  if (w <= 0.0) {
    return true;
  }
  const double res = residue(t, w);
  return res >= radius && w - res >= radius;
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t scale_index, std::size_t replication) {
  return seeds::derive(seeds::derive(master, scale_index, "scale"), replication, "replication");
}

ConvergenceReport run_sweep(const ScalingConfig& cfg) {
  validate(cfg);

  ConvergenceReport report;
  report.fluid_workload = cfg.fluid.workload();
  report.exclusion_radius = cfg.exclusion_radius.value_or(0.05 * report.fluid_workload);
  report.test_tags = cfg.tests.tags();
  report.notes = cfg.fluid.validation_notes();
  if (cfg.reference == FluidReference::per_replication) {
    report.notes.push_back("fluid reference uses each replication's scaled initial batch");
  }
  for (double t : cfg.time_grid) {
    if (cfg.score_near_multiples || is_kept_time(t, report.fluid_workload, report.exclusion_radius)) {
      report.kept_times.push_back(t);
    } else {
      report.excluded_times.push_back(t);
    }
  }
  if (report.kept_times.empty()) {
    throw std::invalid_argument("every grid point falls inside the exclusion radius");
  }
  const double t_max = *std::max_element(cfg.time_grid.begin(), cfg.time_grid.end());
  const auto& fns = cfg.tests.functions();
  const std::size_t n_kept = report.kept_times.size();

  // Fluid integrals for the idealized reference are shared by every replication.
  auto fluid_integrals = [&](const FluidParams& p) {
    std::vector<std::vector<double>> sig(n_kept, std::vector<double>(fns.size()));
    std::vector<std::vector<double>> mu(n_kept, std::vector<double>(fns.size()));
    for (std::size_t i = 0; i < n_kept; ++i) {
      const FluidState st = fluid_state(p, report.kept_times[i]);
      for (std::size_t j = 0; j < fns.size(); ++j) {
        sig[i][j] = integrate(st.sigma, fns[j]);
        mu[i][j] = integrate(st.mu, fns[j]);
      }
    }
    return std::pair{sig, mu};
  };
  const auto idealized = fluid_integrals(cfg.fluid);

  const std::size_t n_scales = cfg.scales.size();
  const std::size_t n_tasks = n_scales * cfg.replications;
  std::vector<ReplicationResult> results(n_tasks);
  std::vector<std::exception_ptr> failures(n_tasks);

  auto run_one = [&](std::size_t task) {
    const std::size_t s = task / cfg.replications;
    const std::size_t rep = task % cfg.replications;
    const double r = cfg.scales[s];
    ReplicationResult& out = results[task];
    out.seed = replication_seed(cfg.seed, s, rep);

    SimConfig sim = cfg.base;
    sim.scale = r;
    sim.horizon = r * t_max;
    if (!(sim.horizon > 0.0)) {
      sim.horizon = r;  // grid is {0}; any positive horizon works
    }
    sim.snapshot_grid.clear();
    sim.seed = out.seed;
    sim.replication = 0;
    const Trace trace = run(sim);
    out.jobs = trace.jobs().size();

    FluidParams reference = cfg.fluid;
    if (cfg.reference == FluidReference::per_replication) {
      reference.xi = trace.batches().front().profile.scaled(1.0 / r);
    }
    const double w = reference.workload();
    const auto own = cfg.reference == FluidReference::per_replication ? fluid_integrals(reference) : idealized;

    for (double t : cfg.time_grid) {
      const ScaledSnapshot snap = scaled_snapshot(trace, r, t);
      out.workload_sup_error = std::max(out.workload_sup_error, std::abs(snap.workload - w));
    }
    out.sigma_err.assign(n_kept, std::vector<double>(fns.size()));
    out.mu_err.assign(n_kept, std::vector<double>(fns.size()));
    double total = 0.0;
    for (std::size_t i = 0; i < n_kept; ++i) {
      const ScaledSnapshot snap = scaled_snapshot(trace, r, report.kept_times[i]);
      double worst_sigma = 0.0;
      double worst_mu = 0.0;
      for (std::size_t j = 0; j < fns.size(); ++j) {
        out.sigma_err[i][j] = std::abs(snap.sigma.integrate(fns[j]) - own.first[i][j]);
        out.mu_err[i][j] = std::abs(snap.mu.integrate(fns[j]) - own.second[i][j]);
        worst_sigma = std::max(worst_sigma, out.sigma_err[i][j]);
        worst_mu = std::max(worst_mu, out.mu_err[i][j]);
      }
      total += worst_sigma + worst_mu;
    }
    out.aggregate = total / static_cast<double>(n_kept);
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < n_tasks; task = next++) {
      try {
        run_one(task);
      } catch (...) {
        failures[task] = std::current_exception();
      }
    }
  };
  const unsigned n_workers = std::max(1U, std::min<unsigned>(cfg.workers, static_cast<unsigned>(n_tasks)));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (unsigned i = 0; i < n_workers; ++i) {
      pool.emplace_back(worker);
    }
  }

  for (std::size_t task = 0; task < n_tasks; ++task) {
    if (failures[task]) {
      const std::size_t s = task / cfg.replications;
      try {
        std::rethrow_exception(failures[task]);
      } catch (const std::exception& e) {
        std::ostringstream os;
        os << "replication " << task % cfg.replications << " at scale " << cfg.scales[s] << " (seed "
           << results[task].seed << ") failed: " << e.what();
        throw ReplicationError(os.str(), cfg.scales[s], results[task].seed);
      }
    }
  }

  // Deterministic reduction in (scale, replication) order.
  const auto reps = static_cast<double>(cfg.replications);
  for (std::size_t s = 0; s < n_scales; ++s) {
    ScaleSummary summary;
    summary.r = cfg.scales[s];
    std::vector<std::vector<double>> sig_sum(n_kept, std::vector<double>(fns.size(), 0.0));
    std::vector<std::vector<double>> sig_max = sig_sum;
    std::vector<std::vector<double>> mu_sum = sig_sum;
    std::vector<std::vector<double>> mu_max = sig_sum;
    for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
      const ReplicationResult& res = results[s * cfg.replications + rep];
      summary.seeds.push_back(res.seed);
      summary.aggregate += res.aggregate;
      summary.workload_sup_error += res.workload_sup_error;
      summary.workload_sup_error_max = std::max(summary.workload_sup_error_max, res.workload_sup_error);
      summary.simulated_jobs += res.jobs;
      for (std::size_t i = 0; i < n_kept; ++i) {
        for (std::size_t j = 0; j < fns.size(); ++j) {
          sig_sum[i][j] += res.sigma_err[i][j];
          mu_sum[i][j] += res.mu_err[i][j];
          sig_max[i][j] = std::max(sig_max[i][j], res.sigma_err[i][j]);
          mu_max[i][j] = std::max(mu_max[i][j], res.mu_err[i][j]);
        }
      }
    }
    summary.aggregate /= reps;
    summary.workload_sup_error /= reps;
    for (std::size_t i = 0; i < n_kept; ++i) {
      for (std::size_t j = 0; j < fns.size(); ++j) {
        report.cells.push_back(
            {summary.r, report.kept_times[i], "sigma/" + report.test_tags[j], sig_sum[i][j] / reps, sig_max[i][j]});
      }
      for (std::size_t j = 0; j < fns.size(); ++j) {
        report.cells.push_back(
            {summary.r, report.kept_times[i], "mu/" + report.test_tags[j], mu_sum[i][j] / reps, mu_max[i][j]});
      }
    }
    report.scales.push_back(std::move(summary));
  }
  return report;
}

CheckResult check_convergence(const ConvergenceReport& report, const ConvergenceRule& rule) {
  if (report.scales.size() < 2) {
    throw std::invalid_argument("convergence check needs at least two scales");
  }
  CheckResult result;
  result.passed = true;
  std::ostringstream os;
  os.precision(6);
  const auto& first = report.scales.front();
  const auto& last = report.scales.back();

  for (std::size_t i = 1; i < report.scales.size(); ++i) {
    const auto& prev = report.scales[i - 1];
    const auto& cur = report.scales[i];
    const bool ok = cur.aggregate <= (1.0 + rule.monotone_slack) * prev.aggregate;
    os << "D(" << cur.r << ") = " << cur.aggregate << (ok ? " <= " : " > ") << (1.0 + rule.monotone_slack)
       << " * D(" << prev.r << ") = " << (1.0 + rule.monotone_slack) * prev.aggregate << (ok ? "" : "  [FAIL]")
       << '\n';
    result.passed = result.passed && ok;
  }

  const bool halved = last.aggregate <= rule.required_ratio * first.aggregate;
  os << "D(" << last.r << ") = " << last.aggregate << (halved ? " <= " : " > ") << rule.required_ratio << " * D("
     << first.r << ") = " << rule.required_ratio * first.aggregate << (halved ? "" : "  [FAIL]") << '\n';
  result.passed = result.passed && halved;

  if (rule.workload_bound) {
    const bool ok = last.workload_sup_error < *rule.workload_bound;
    os << "workload sup-error at r = " << last.r << ": " << last.workload_sup_error << (ok ? " < " : " >= ")
       << *rule.workload_bound << (ok ? "" : "  [FAIL]") << '\n';
    result.passed = result.passed && ok;
  }
  os << (result.passed ? "convergence check passed" : "convergence check failed");
  result.narrative = os.str();
  return result;
}

}  // namespace gps
