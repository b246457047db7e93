#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gps/fluid.hpp"
#include "support/generators.hpp"

namespace gps {
namespace {

using testing::close_rel;

const TestFunctionSet kProbes = TestFunctionSet::defaults();

FluidParams exp_params() {
  FluidParams p;
  p.alpha = 1.0;
  p.nu = DistributionSpec::exponential(1.0);
  p.xi = ScaledDistribution{1.0, DistributionSpec::exponential(1.0)};
  return p;
}

FluidParams zero_params() {
  FluidParams p = exp_params();
  p.xi = AtomicMeasure{};
  return p;
}

TEST(Residue, Examples) {
  EXPECT_EQ(residue(2.5, 1.0), 0.5);
  EXPECT_EQ(residue(3.0, 1.0), 0.0);
  EXPECT_EQ(residue(7.3, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(residue(7.3, 2.5), 2.3);
  EXPECT_THROW(residue(-1.0, 1.0), std::invalid_argument);
}

TEST(FluidMu, Examples) {
  const FluidParams p = exp_params();
  const Measure half = fluid_mu(p, 0.5);
  EXPECT_LE(discrepancy(half, ScaledDistribution{0.5, DistributionSpec::exponential(1.0)}, kProbes), 1e-15);
  EXPECT_TRUE(is_zero(fluid_mu(p, 1.0)));
  for (double t : {0.0, 0.4, 3.3}) {
    EXPECT_TRUE(is_zero(fluid_mu(zero_params(), t)));
  }
}

TEST(FluidSigma, ExponentialExamples) {
  const FluidParams p = exp_params();
  const Measure half = fluid_sigma(p, 0.5);
  EXPECT_NEAR(total_mass(half), 0.5, 1e-12);
  EXPECT_LE(discrepancy(half, ScaledDistribution{0.5, DistributionSpec::exponential(1.0)}, kProbes), 1e-12);
  EXPECT_LE(discrepancy(fluid_sigma(p, 1.0), ScaledDistribution{1.0, p.nu}, kProbes), 1e-12);
  EXPECT_LE(discrepancy(fluid_sigma(p, 2.5), fluid_sigma(p, 1.5), kProbes), 1e-12);
  EXPECT_TRUE(is_zero(fluid_sigma(zero_params(), 2.0)));
}

TEST(FluidWorkload, Examples) {
  EXPECT_EQ(fluid_workload(exp_params(), 0.7), 1.0);
  EXPECT_EQ(fluid_workload(zero_params(), 0.7), 0.0);
  FluidParams p = exp_params();
  p.xi = ScaledDistribution{2.5, DistributionSpec::exponential(1.0)};
  EXPECT_EQ(fluid_workload(p, 7.3), 2.5);
}

TEST(FluidQueueLength, Examples) {
  const FluidParams p = exp_params();
  for (double t : {0.0, 0.3, 1.0, 1.25, 1.5, 2.9, 10.1}) {
    EXPECT_NEAR(fluid_queue_length(p, t), 1.0, 1e-12) << "t=" << t;
  }
  FluidParams det;
  det.alpha = 1.0;
  det.nu = DistributionSpec::deterministic(1.0);
  det.xi = ScaledDistribution{1.0, DistributionSpec::deterministic(1.0)};
  EXPECT_DOUBLE_EQ(fluid_queue_length(det, 1.5), 1.5);
  EXPECT_DOUBLE_EQ(total_mass(fluid_sigma(det, 1.5)), 1.0);
  EXPECT_EQ(fluid_queue_length(zero_params(), 4.0), 0.0);
}

TEST(FluidParams, ValidationNotes) {
  EXPECT_TRUE(exp_params().validation_notes().empty());
  FluidParams p = exp_params();
  p.alpha = 0.8;
  EXPECT_EQ(p.validation_notes().size(), 1u);
  p = exp_params();
  p.nu = DistributionSpec::deterministic(1.0);
  p.xi = AtomicMeasure({{1.0, 1.0}});
  EXPECT_EQ(p.validation_notes().size(), 2u);
}

class RandomFluid : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 rng(8128);
    for (int i = 0; i < 20; ++i) {
      params_.push_back(testing::random_fluid_params(rng));
    }
  }
  std::vector<FluidParams> params_;
};

TEST_F(RandomFluid, Periodicity) {
  std::mt19937_64 rng(1);
  for (const auto& p : params_) {
    const double w = p.workload();
    for (int i = 0; i < 20; ++i) {
      const double t = w * testing::uniform(rng, 1.01, 3.99);
      if (residue(t, w) > 0.99 * w) {
        continue;
      }
      EXPECT_LE(discrepancy(fluid_sigma(p, t + w), fluid_sigma(p, t), kProbes), 1e-9) << p.nu.name();
      EXPECT_LE(discrepancy(fluid_mu(p, t + w), fluid_mu(p, t), kProbes), 1e-9) << p.nu.name();
    }
  }
}

TEST_F(RandomFluid, BoundarySplice) {
  for (const auto& p : params_) {
    const double w = p.workload();
    const Measure cycle = ScaledDistribution{p.alpha * w, p.nu};
    EXPECT_LE(discrepancy(fluid_sigma(p, w), cycle, kProbes), 1e-9);
    EXPECT_LE(discrepancy(fluid_mu(p, w * (1.0 - 1e-13)), cycle, kProbes), 1e-9);
    EXPECT_TRUE(is_zero(fluid_mu(p, w)));
  }
}

TEST_F(RandomFluid, WorkloadIsConstant) {
  for (const auto& p : params_) {
    const double w = p.workload();
    for (int i = 0; i <= 400; ++i) {
      const double t = 4.0 * w * i / 400.0;
      const FluidState st = fluid_state(p, t);
      ASSERT_TRUE(close_rel(first_moment(st.sigma) + first_moment(st.mu), w, 1e-9))
          << p.nu.name() << " t=" << t << ": " << first_moment(st.sigma) + first_moment(st.mu) << " vs " << w;
      ASSERT_EQ(fluid_workload(p, t), w);
    }
  }
}

TEST_F(RandomFluid, FirstCycleWorkDecreasesLinearly) {
  for (const auto& p : params_) {
    const double w = p.workload();
    for (int i = 0; i < 50; ++i) {
      const double t = w * i / 50.0;
      ASSERT_TRUE(close_rel(first_moment(fluid_sigma(p, t)), w - t, 1e-9)) << "t=" << t;
    }
  }
}

TEST_F(RandomFluid, MonotoneWithinCycle) {
  for (const auto& p : params_) {
    const double w = p.workload();
    for (int k = 0; k < 3; ++k) {
      double prev_sigma = INFINITY;
      for (int i = 0; i < 40; ++i) {
        const double t = w * (k + i / 40.0);
        const double mass = total_mass(fluid_sigma(p, t));
        ASSERT_LE(mass, prev_sigma * (1.0 + 1e-12) + 1e-15) << "t=" << t;
        prev_sigma = mass;
        ASSERT_TRUE(close_rel(total_mass(fluid_mu(p, t)), p.alpha * residue(t, w), 1e-12));
      }
    }
  }
}

TEST_F(RandomFluid, StateMatchesComponents) {
  for (const auto& p : params_) {
    const double t = 1.7 * p.workload();
    const FluidState st = fluid_state(p, t);
    EXPECT_EQ(st.t, t);
    EXPECT_EQ(st.residue, residue(t, p.workload()));
    EXPECT_EQ(total_mass(st.sigma) + total_mass(st.mu), fluid_queue_length(p, t));
  }
}

}  // namespace
}  // namespace gps
