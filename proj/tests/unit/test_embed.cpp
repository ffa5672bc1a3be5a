#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fgf/embed.hpp"
#include "fgf/error.hpp"
#include "oracles.hpp"

namespace {

using fgf::Index;
using fgf::Matrix;
using fgf::TrainConfig;

TrainConfig two_block_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.dim = 4;
  cfg.samples_per_node = 50;
  cfg.epochs = 20;
  cfg.seed = seed;
  return cfg;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  return ab / std::sqrt(aa * bb);
}

TEST(Init, DeterministicBoundedZeroContext) {
  const auto a = fgf::init_embeddings(100, 50, 1.0, 5);
  const auto b = fgf::init_embeddings(100, 50, 1.0, 5);
  EXPECT_EQ(a.target, b.target);
  for (double v : a.context.values()) EXPECT_EQ(v, 0.0);
  for (double v : a.target.values()) EXPECT_LE(std::abs(v), 0.02);
  EXPECT_NE(a.target, fgf::init_embeddings(100, 50, 1.0, 6).target);
}

TEST(Sigmoid, StableAtExtremes) {
  EXPECT_EQ(fgf::sigmoid(0.0), 0.5);
  EXPECT_NEAR(fgf::log_sigmoid(-800.0), -800.0, 1e-9);
  EXPECT_EQ(fgf::log_sigmoid(800.0), 0.0);
  for (double x : {-30.0, -2.5, 0.0, 1.0, 12.0}) {
    EXPECT_NEAR(-fgf::log_sigmoid(x), oracle::neg_log_sigmoid(x), 1e-14);
  }
}

TEST(SgdStep, ZeroContextPositivePair) {
  std::vector<double> f{0.3, -0.2, 0.1};
  std::vector<double> g{0.0, 0.0, 0.0};
  const auto f0 = f;
  const double lr = 0.1;
  const double loss = fgf::sgd_step(f, g, true, lr);
  EXPECT_EQ(f, f0);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(g[k], lr * 0.5 * f0[k]);
  EXPECT_DOUBLE_EQ(loss, std::log(2.0));
}

TEST(SgdStep, ZeroRateLeavesRowsUnchanged) {
  std::vector<double> f{0.3, -0.2};
  std::vector<double> g{0.5, 0.7};
  const auto f0 = f;
  const auto g0 = g;
  fgf::sgd_step(f, g, false, 0.0);
  EXPECT_EQ(f, f0);
  EXPECT_EQ(g, g0);
}

TEST(SgdStep, UpdateMatchesFiniteDifferences) {
  // With lr = 1 the step is exactly the gradient of log sigmoid(+-f.g).
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  const double h = 1e-6;
  for (int probe = 0; probe < 40; ++probe) {
    const std::size_t d = 8;
    const bool positive = probe % 2 == 0;
    std::vector<double> f(d), g(d);
    for (auto& v : f) v = u(gen);
    for (auto& v : g) v = u(gen);
    auto objective = [&](const std::vector<double>& ff, const std::vector<double>& gg) {
      double s = 0;
      for (std::size_t k = 0; k < d; ++k) s += ff[k] * gg[k];
      return -oracle::neg_log_sigmoid(positive ? s : -s);
    };
    auto f1 = f, g1 = g;
    fgf::sgd_step(f1, g1, positive, 1.0);
    double num = 0, den = 0;
    for (std::size_t k = 0; k < d; ++k) {
      auto fp = f, fm = f, gp = g, gm = g;
      fp[k] += h;
      fm[k] -= h;
      gp[k] += h;
      gm[k] -= h;
      const double dfk = (objective(fp, g) - objective(fm, g)) / (2 * h);
      const double dgk = (objective(f, gp) - objective(f, gm)) / (2 * h);
      const double af = f1[k] - f[k];
      const double ag = g1[k] - g[k];
      num += (af - dfk) * (af - dfk) + (ag - dgk) * (ag - dgk);
      den += std::max(af * af + ag * ag, dfk * dfk + dgk * dgk);
    }
    EXPECT_LE(std::sqrt(num / den), 1e-6) << "probe " << probe;
  }
}

TEST(SgdStep, GradientHelperAgreesWithStep) {
  std::vector<double> f{0.4, -0.1, 0.25}, g{-0.3, 0.6, 0.05};
  std::vector<double> gf(3), gg(3);
  fgf::log_sigmoid_gradient(f, g, false, gf, gg);
  auto f1 = f, g1 = g;
  fgf::sgd_step(f1, g1, false, 0.5);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_NEAR(f1[k] - f[k], 0.5 * gf[k], 1e-15);
    EXPECT_NEAR(g1[k] - g[k], 0.5 * gg[k], 1e-15);
  }
}

TEST(Train, ZeroEpochsReturnsInitialization) {
  const auto aff = oracle::two_block_affinity();
  const auto samplers = fgf::build_samplers(aff, 0.75, 1);
  auto cfg = two_block_config(3);
  cfg.epochs = 0;
  const auto r = fgf::train(aff, samplers, cfg);
  const auto init = fgf::init_embeddings(10, 4, 1.0, fgf::derive_seed(3, "init"));
  EXPECT_EQ(r.embeddings.vectors(), init.target);
  EXPECT_EQ(r.report.positive_pairs, 0u);
  EXPECT_TRUE(r.report.epoch_loss.empty());
}

TEST(Train, TwoBlocksSeparate) {
  const auto aff = oracle::two_block_affinity();
  const auto samplers = fgf::build_samplers(aff, 0.75, 2);
  const auto r = fgf::train(aff, samplers, two_block_config(7));
  const Matrix& f = r.embeddings.vectors();
  double intra = 0, inter = 0;
  int n_intra = 0, n_inter = 0;
  for (Index i = 0; i < 10; ++i) {
    for (Index j = i + 1; j < 10; ++j) {
      const double c = cosine(f.row(i), f.row(j));
      if (i / 5 == j / 5) {
        intra += c;
        ++n_intra;
      } else {
        inter += c;
        ++n_inter;
      }
    }
  }
  EXPECT_GT(intra / n_intra, inter / n_inter);
  EXPECT_EQ(r.report.epoch_loss.size(), 20u);
  EXPECT_EQ(r.report.positive_pairs, 20u * 10u * 50u);
}

TEST(Train, SameSeedSameResult) {
  const auto aff = oracle::two_block_affinity();
  const auto samplers = fgf::build_samplers(aff, 0.75, 2);
  const auto a = fgf::train(aff, samplers, two_block_config(4));
  const auto b = fgf::train(aff, samplers, two_block_config(4));
  EXPECT_EQ(a.embeddings.vectors(), b.embeddings.vectors());
  EXPECT_EQ(a.report.epoch_loss, b.report.epoch_loss);
}

TEST(Train, ParallelModeProducesFiniteEmbeddings) {
  const auto aff = oracle::two_block_affinity();
  const auto samplers = fgf::build_samplers(aff, 0.75, 2);
  auto cfg = two_block_config(4);
  cfg.threads = 3;
  const auto r = fgf::train(aff, samplers, cfg);
  EXPECT_TRUE(r.embeddings.vectors().all_finite());
  EXPECT_EQ(r.report.positive_pairs, 20u * 10u * 50u);
}

TEST(Train, DivergenceDetected) {
  const auto aff = oracle::two_block_affinity();
  const auto samplers = fgf::build_samplers(aff, 0.75, 2);
  auto cfg = two_block_config(4);
  cfg.lr_start = 1e6;
  cfg.init_scale = 400.0;
  try {
    fgf::train(aff, samplers, cfg);
    FAIL();
  } catch (const fgf::Error& e) {
    EXPECT_EQ(e.code(), fgf::ErrorCode::Divergence);
  }
}

TEST(Train, InvalidConfig) {
  const auto aff = oracle::two_block_affinity();
  const auto samplers = fgf::build_samplers(aff, 0.75, 2);
  auto cfg = two_block_config(4);
  cfg.dim = 0;
  EXPECT_THROW(fgf::train(aff, samplers, cfg), fgf::Error);
  cfg = two_block_config(4);
  cfg.lr_end = 0.5;
  EXPECT_THROW(fgf::train(aff, samplers, cfg), fgf::Error);
}

TEST(SurrogateLoss, ZeroEmbeddingsGiveLogTwoPerTerm) {
  const auto aff = oracle::two_block_affinity();
  const auto samplers = fgf::build_samplers(aff, 0.75, 2);
  const Matrix zero(10, 4);
  const auto est = fgf::estimate_surrogate_loss(zero, zero, samplers, 500, 5, 1);
  EXPECT_NEAR(est.mean, 6.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(est.standard_error, 0.0, 1e-12);
}

TEST(SurrogateLoss, DropsAfterTraining) {
  const auto aff = oracle::two_block_affinity();
  const auto samplers = fgf::build_samplers(aff, 0.75, 2);
  const auto cfg = two_block_config(9);
  const auto init = fgf::init_embeddings(10, 4, 1.0, fgf::derive_seed(9, "init"));
  const auto r = fgf::train(aff, samplers, cfg);
  const double before = fgf::surrogate_loss(init.target, init.context, samplers, 4000, 5, 3);
  const double after = fgf::surrogate_loss(r.embeddings.vectors(), r.context, samplers, 4000, 5, 3);
  EXPECT_LT(after, before);
}

TEST(SurrogateLoss, MonteCarloConsistency) {
  const auto aff = oracle::two_block_affinity();
  const auto samplers = fgf::build_samplers(aff, 0.75, 2);
  const auto r = fgf::train(aff, samplers, two_block_config(5));
  const auto small = fgf::estimate_surrogate_loss(r.embeddings.vectors(), r.context, samplers, 5000, 5, 11);
  const auto large = fgf::estimate_surrogate_loss(r.embeddings.vectors(), r.context, samplers, 10000, 5, 12);
  EXPECT_GT(small.standard_error, 0.0);
  EXPECT_LT(std::abs(small.mean - large.mean), 3.0 * small.standard_error);
}

}  // namespace
