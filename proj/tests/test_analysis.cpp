#include <gtest/gtest.h>

#include <random>

#include "ril/analysis.hpp"
#include "ril/oracle.hpp"

using namespace ril;

TEST(Flag, LeadingOrderExamples) {
  EXPECT_EQ(wrong_guess_given_0({}, {}).value, 0.0);
  const FlagParams f{0.01, 0.0, 0.01};
  const ChannelErrors e{0.001, 0.002, 0.02, 0.0};
  EXPECT_NEAR(wrong_guess_given_0(f, e).value, 3.1e-4, 1e-18);
  EXPECT_NEAR(wrong_guess_given_0({0.0, 0.0, 0.01}, e).value, 0.01 * 0.001, 1e-18);

  EXPECT_EQ(wrong_guess_given_1({0.0, 0.001, 0.0}, e).value, 1.0);
  EXPECT_NEAR(wrong_guess_given_1({0.003, 0.001, 0.0}, e).value, 0.5, 1e-15);
  EXPECT_LT(wrong_guess_given_1({1.0, 1e-9, 0.0}, {0.0, 1e-9, 0.0, 0.0}).value, 1e-8);
  const FlagEstimate undefined = wrong_guess_given_1({}, {});
  EXPECT_FALSE(undefined.defined);
  EXPECT_EQ(undefined.value, 0.0);
  EXPECT_FALSE(wrong_guess_given_0({0.2, 0.0, 0.0}, {}).small_parameters);
  EXPECT_THROW(wrong_guess_given_0({1.5, 0.0, 0.0}, {}), std::invalid_argument);
}

TEST(Flag, GivenOneIsMonotone) {
  const ChannelErrors e{0.001, 0.004, 0.01, 0.0};
  double prev = 2.0;
  for (double eps_l : {0.0, 1e-4, 1e-3, 1e-2, 0.1}) {
    const double v = wrong_guess_given_1({eps_l, 0.002, 0.0}, e).value;
    EXPECT_LT(v, prev);
    prev = v;
  }
  prev = -1.0;
  for (double eps_1s : {0.0, 1e-4, 1e-3, 1e-2}) {
    const double v = wrong_guess_given_1({0.01, eps_1s, 0.0}, e).value;
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(Flag, JointTableIsANormalizedDistribution) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 0.2);
  for (int i = 0; i < 200; ++i) {
    const double p_l = u(rng) * 0.5;
    const FlagParams f{u(rng), u(rng), u(rng)};
    const ChannelErrors e{p_l, p_l + u(rng), u(rng), u(rng)};
    const JointFlagTable t = joint_flag_table(f, e);
    EXPECT_NEAR(t.total(), 1.0, 1e-12);
    EXPECT_EQ(t.conditional(Ancilla::kSinglet, Occupancy::kLeaked, Occupancy::kUnleaked), 0.0);
    for (auto in : {Occupancy::kUnleaked, Occupancy::kLeaked}) {
      double s = 0.0;
      for (auto j : {Ancilla::kSinglet, Ancilla::kTriplet}) {
        for (auto o : {Occupancy::kUnleaked, Occupancy::kLeaked}) s += t.conditional(j, o, in);
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
    for (int flag = 0; flag < 2; ++flag) {
      double s = 0.0;
      for (auto o : {Occupancy::kUnleaked, Occupancy::kLeaked}) {
        for (auto in : {Occupancy::kUnleaked, Occupancy::kLeaked}) s += t.joint(flag, o, in);
      }
      EXPECT_NEAR(s, t.flag_probability(flag), 1e-15);
    }
  }
}

TEST(Flag, IdealChannelPerfectMeasurement) {
  const JointFlagTable t = joint_flag_table({0.01, 0.0, 0.0}, {});
  EXPECT_NEAR(t.joint(1, Occupancy::kUnleaked, Occupancy::kLeaked), 0.01, 1e-15);
  EXPECT_NEAR(t.joint(0, Occupancy::kUnleaked, Occupancy::kUnleaked), 0.99, 1e-15);
  EXPECT_EQ(t.wrong_given_0(), 0.0);
  EXPECT_EQ(t.wrong_given_1(), 0.0);
}

TEST(Flag, ExactTableAgreesWithLeadingOrder) {
  const FlagParams f{1e-3, 1e-4, 2e-4};
  const ChannelErrors e{1e-5, 3e-5, 1e-4, 2e-5};
  const JointFlagTable t = joint_flag_table(f, e);
  EXPECT_NEAR(t.wrong_given_0() / wrong_guess_given_0(f, e).value, 1.0, 0.01);
  EXPECT_NEAR(t.wrong_given_1() / wrong_guess_given_1(f, e).value, 1.0, 0.01);
  EXPECT_NEAR(t.flag_probability(1) / (f.eps_1S + e.eps_F + f.eps_L), 1.0, 0.01);
}

TEST(Flag, InconsistentMetricsRejected) {
  EXPECT_THROW(joint_flag_table({}, {0.01, 0.005, 0.0, 0.0}), std::domain_error);
}

TEST(Gauge, Endpoints) {
  const GaugeStationary a = gauge_stationary({0.0});
  EXPECT_NEAR(a.p_down, 0.5, 1e-15);
  EXPECT_NEAR(a.p_up, 0.5, 1e-15);
  EXPECT_NEAR(a.decay_eigenvalue, -1.0 / 3.0, 1e-15);
  EXPECT_NEAR(a.coherence_weight, 0.0, 1e-15);
  const GaugeStationary b = gauge_stationary({1.0});
  EXPECT_NEAR(b.p_down, 1.0, 1e-15);
  EXPECT_NEAR(b.p_up, 0.0, 1e-15);
  EXPECT_NEAR(b.decay_eigenvalue, 0.0, 1e-15);
  EXPECT_NEAR(b.coherence_weight, 1.0, 1e-15);
  EXPECT_THROW(gauge_stationary({-0.1}), std::invalid_argument);
}

TEST(Gauge, SmallRelaxation) {
  const double eta = 0.04;
  const GaugeStationary s = gauge_stationary({eta});
  EXPECT_NEAR(s.coherence_weight, 3.0 * eta / (4.0 - eta), 1e-15);
  EXPECT_NEAR(s.coherence_weight, 0.0303030303, 1e-9);
  EXPECT_LT(std::abs(s.coherence_weight - 0.75 * eta), eta * eta);
}

TEST(Gauge, RandomEtaFixedPointAndSpectrum) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Eigen::Matrix2d pg = gauge_pumping();
  EXPECT_NEAR(pg.colwise().sum().maxCoeff(), 1.0, 1e-15);
  EXPECT_NEAR(pg.rowwise().sum().maxCoeff(), 1.0, 1e-15);
  for (int i = 0; i < 100; ++i) {
    const double eta = u(rng);
    const Eigen::Matrix2d r = gauge_relaxation(eta);
    EXPECT_EQ(r.colwise().sum(), Eigen::RowVector2d(1.0, 1.0));
    const GaugeStationary s = gauge_stationary({eta});
    const Eigen::Vector2d p(s.p_down, s.p_up);
    EXPECT_LT(((r * pg) * p - p).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(s.p_down, 0.5 * (1.0 + 3.0 * eta / (4.0 - eta)), 1e-12);
    Eigen::EigenSolver<Eigen::Matrix2d> es(r * pg);
    const Eigen::Vector2d ev = es.eigenvalues().real();
    EXPECT_NEAR(std::min(ev(0), ev(1)), s.decay_eigenvalue, 1e-12);
    EXPECT_NEAR(s.decay_eigenvalue, -(1.0 - eta) / 3.0, 1e-12);
  }
}

TEST(Coherence, AncillaBranchWeights) {
  const double a = std::sqrt(0.5), b = std::sqrt(0.5);
  using oracle::AncillaState;
  // Branch order: S, T+, T0, T-.
  const auto down = oracle::coherent_leakage(a, b, -1);
  EXPECT_NEAR(down.by_branch[0].cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_NEAR(down.by_branch[2](0, 0).real(), 0.5 / 3.0, 1e-12);
  EXPECT_NEAR(down.by_branch[2](0, 1).real(), 0.5 / 3.0, 1e-12);
  EXPECT_NEAR(down.by_branch[2](1, 1).real(), 0.5 / 3.0, 1e-12);
  EXPECT_NEAR(down.by_branch[3](0, 0).real(), 0.5 * 4.0 / 6.0, 1e-12);
  EXPECT_NEAR(down.by_branch[3](0, 1).real(), 0.5 * 2.0 / 6.0, 1e-12);
  EXPECT_NEAR(down.by_branch[3](1, 1).real(), 0.5 / 6.0, 1e-12);
  EXPECT_NEAR(down.by_branch[1](1, 1).real(), 0.5 / 2.0, 1e-12);
  EXPECT_NEAR(down.by_branch[1](0, 0).real(), 0.0, 1e-12);

  const auto up = oracle::coherent_leakage(a, b, +1);
  EXPECT_NEAR(up.by_branch[2](0, 1).real(), -0.5 / 3.0, 1e-12);
  EXPECT_NEAR(up.by_branch[1](0, 0).real(), 0.5 * 4.0 / 6.0, 1e-12);
  EXPECT_NEAR(up.by_branch[1](0, 1).real(), -0.5 * 2.0 / 6.0, 1e-12);
  EXPECT_NEAR(up.by_branch[3](1, 1).real(), 0.5 / 2.0, 1e-12);
}

TEST(Coherence, TracedCrossTermsAndPurity) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  for (int i = 0; i < 20; ++i) {
    Cplx a(g(rng), g(rng)), b(g(rng), g(rng));
    const double n = std::sqrt(std::norm(a) + std::norm(b));
    a /= n;
    b /= n;
    for (int qubit : {0, 1}) {
      for (int two_m : {-1, 1}) {
        const Eigen::Matrix2cd rho = oracle::coherent_leakage(a, b, two_m, qubit).traced;
        const double sign = two_m < 0 ? 1.0 : -1.0;
        EXPECT_NEAR(std::abs(rho(0, 0) - std::norm(a)), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(rho(1, 1) - std::norm(b)), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(rho(0, 1) - sign * 2.0 / 3.0 * a * std::conj(b)), 0.0, 1e-12);
        EXPECT_GE(oracle::purity(rho), 13.0 / 18.0 - 1e-12);
      }
    }
  }
  const auto even = oracle::coherent_leakage(std::sqrt(0.5), std::sqrt(0.5), -1);
  EXPECT_NEAR(oracle::purity(even.traced), 13.0 / 18.0, 1e-12);
}
