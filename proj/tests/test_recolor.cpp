#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rgbuv/errors.hpp"
#include "rgbuv/metrics.hpp"
#include "rgbuv/recolor.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace rgbuv;
namespace fx = rgbuv::testing;
namespace oracle = rgbuv::testing::oracle;

namespace {

ImageBuffer perturbed(const ImageBuffer& im, double amount, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amount, amount);
  ImageBuffer out = im;
  for (double& v : out.data()) {
    v += dist(rng);
  }
  out.clamp();
  return out;
}

double mean_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += std::abs(a.data()[i] - b.data()[i]);
  }
  return s / static_cast<double>(a.size());
}

}  // namespace

TEST(ReconKernel, ParsesNames) {
  EXPECT_EQ(parse_recon_kernel("laplacian"), ReconKernel::laplacian);
  EXPECT_EQ(parse_recon_kernel("sobel"), ReconKernel::sobel);
  EXPECT_STREQ(to_string(ReconKernel::sobel), "sobel");
  EXPECT_THROW((void)parse_recon_kernel("gauss"), InvalidArgument);
}

TEST(RecolorConfig, Validation) {
  EXPECT_NO_THROW(RecolorConfig{}.validate());
  auto bad = [](auto mutate) {
    RecolorConfig c;
    mutate(c);
    return c;
  };
  EXPECT_THROW(bad([](RecolorConfig& c) { c.alpha = -1; }).validate(), InvalidArgument);
  EXPECT_THROW(bad([](RecolorConfig& c) { c.beta = NAN; }).validate(), InvalidArgument);
  EXPECT_THROW(bad([](RecolorConfig& c) { c.iterations = 0; }).validate(), InvalidArgument);
  EXPECT_THROW(bad([](RecolorConfig& c) { c.step_size = 0; }).validate(), InvalidArgument);
  EXPECT_THROW(bad([](RecolorConfig& c) { c.blur_sigma = 0; }).validate(), InvalidArgument);
  EXPECT_THROW(bad([](RecolorConfig& c) { c.momentum = 1.0; }).validate(), InvalidArgument);
  EXPECT_THROW(bad([](RecolorConfig& c) { c.direction_tau = -0.1; }).validate(), InvalidArgument);
  EXPECT_THROW(bad([](RecolorConfig& c) { c.max_backtracks = -1; }).validate(), InvalidArgument);
}

TEST(ReconstructionLoss, MatchesOracles) {
  const ImageBuffer a = fx::random_image(9, 7, 1);
  const ImageBuffer b = fx::random_image(9, 7, 2);
  EXPECT_NEAR(laplacian_loss(a, b), oracle::laplacian_loss(a, b), 1e-10);
  EXPECT_NEAR(sobel_loss(a, b), oracle::sobel_loss(a, b), 1e-10);
  EXPECT_EQ(laplacian_loss(a, a), 0.0);
  EXPECT_THROW((void)laplacian_loss(a, fx::random_image(7, 9, 2)), InvalidArgument);
}

TEST(ReconstructionLoss, InvariantToConstantShift) {
  // Both kernels sum to zero, so adding a constant to the output changes nothing.
  const ImageBuffer a = fx::random_image(6, 6, 3, 0.2, 0.7);
  ImageBuffer b = a;
  for (double& v : b.data()) {
    v += 0.1;
  }
  EXPECT_NEAR(laplacian_loss(a, b), 0.0, 1e-12);
  EXPECT_NEAR(sobel_loss(a, b), 0.0, 1e-12);
}

TEST(VarianceLoss, MatchesOracle) {
  const HistogramParams p;
  const ImageBuffer in = fx::random_image(10, 12, 5);
  const ImageBuffer out = fx::random_image(10, 12, 6, 0.3, 0.6);
  const auto h_in = compute_histogram(in, p);
  const auto h_t = compute_histogram(fx::fixture_target_image(16), p);
  std::vector<double> a(h_in.values().begin(), h_in.values().end());
  std::vector<double> t(h_t.values().begin(), h_t.values().end());
  double w = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    w += std::abs(a[i] - t[i]);
  }
  EXPECT_NEAR(histogram_l1(h_t, h_in), w, 1e-12);
  for (const double sigma : {1.0, 3.0}) {
    EXPECT_NEAR(variance_loss(in, out, h_in, h_t, sigma), -w * oracle::blurred_std_spread(in, out, sigma), 1e-10);
  }
  EXPECT_EQ(variance_loss(in, in, h_in, h_t, 2.0), 0.0);
}

TEST(Objective, BreakdownAddsUp) {
  const HistogramParams p;
  const ImageBuffer in = fx::fixture_input(16);
  const ImageBuffer out = perturbed(in, 0.1, 3);
  const auto target = compute_histogram(fx::fixture_target_image(16), p);
  RecolorConfig cfg;
  cfg.blur_sigma = 3.0;
  const auto l = recolor_objective(in, out, target, cfg, p);
  EXPECT_NEAR(l.total, l.hist_term + l.recon_term + l.variance_term, 1e-14);
  EXPECT_NEAR(l.hist_term, cfg.alpha * l.hellinger_raw, 1e-14);
  EXPECT_NEAR(l.hellinger_raw, hellinger(compute_histogram(out, p), target), 1e-14);
  EXPECT_NEAR(l.recon_term, cfg.beta * laplacian_loss(in, out), 1e-14);
  EXPECT_NEAR(l.w, histogram_l1(target, compute_histogram(in, p)), 1e-14);
}

struct GradientCase {
  ReconKernel kernel;
  double alpha, beta, var;
};

class ObjectiveGradientTest : public ::testing::TestWithParam<GradientCase> {};

TEST_P(ObjectiveGradientTest, MatchesCentralDifferences) {
  const auto gc = GetParam();
  HistogramParams p;
  p.bins = 32;
  const ImageBuffer in = fx::random_image(8, 8, 21, 0.1, 0.9);
  const ImageBuffer out = perturbed(in, 0.05, 22);
  const auto target = compute_histogram(fx::random_image(8, 8, 23, 0.1, 0.9), p);
  RecolorConfig cfg;
  cfg.recon_kernel = gc.kernel;
  cfg.alpha = gc.alpha;
  cfg.beta = gc.beta;
  cfg.variance_weight_scale = gc.var;
  cfg.blur_sigma = 2.0;
  const auto analytic = recolor_objective_gradient(in, out, target, cfg, p);
  const auto numeric = oracle::central_differences(
      out, [&](const ImageBuffer& im) { return recolor_objective(in, im, target, cfg, p).total; }, 1e-6);
  const auto cmp = oracle::compare_gradients(analytic.total.data, numeric, 1e-6);
  EXPECT_LT(cmp.max_relative, 1e-3);
  EXPECT_LT(cmp.max_small_absolute, 1e-6);

  for (std::size_t i = 0; i < analytic.total.data.size(); ++i) {
    const double parts = analytic.hist.data[i] + analytic.recon.data[i] + analytic.variance.data[i];
    ASSERT_NEAR(analytic.total.data[i], parts, 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Weights, ObjectiveGradientTest,
                         ::testing::Values(GradientCase{ReconKernel::laplacian, 2.0, 1.5, 1.0},
                                           GradientCase{ReconKernel::sobel, 2.0, 1.5, 1.0},
                                           GradientCase{ReconKernel::laplacian, 1.0, 0.0, 0.0},
                                           GradientCase{ReconKernel::sobel, 0.0, 0.0, 3.0}));

TEST(Recolor, TraceNonIncreasingAndHellingerDrops) {
  const HistogramParams p;
  const ImageBuffer in = fx::fixture_input(24);
  const auto target = compute_histogram(fx::fixture_target_image(24), p);
  RecolorConfig cfg;
  cfg.iterations = 60;
  const auto r = recolor(in, target, cfg, p);
  ASSERT_EQ(r.trace.size(), 61u);
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    ASSERT_LE(r.trace[i].total, r.trace[i - 1].total) << i;
  }
  EXPECT_LT(hellinger(compute_histogram(r.image, p), target), r.trace.front().hellinger_raw);
  EXPECT_EQ(r.image.height(), 24);
  EXPECT_TRUE(std::all_of(r.image.data().begin(), r.image.data().end(), [](double v) { return v >= 0 && v <= 1; }));
}

TEST(Recolor, IdentityTargetKeepsInput) {
  const HistogramParams p;
  const ImageBuffer in = fx::fixture_input(24);
  RecolorConfig cfg;
  cfg.iterations = 40;
  const auto r = recolor(in, compute_histogram(in, p), cfg, p);
  EXPECT_LT(mean_abs_diff(r.image, in), 0.01);
}

TEST(Recolor, DeterministicIncludingJitter) {
  const HistogramParams p;
  const ImageBuffer in = fx::fixture_input(16);
  const auto target = compute_histogram(fx::fixture_target_image(16), p);
  RecolorConfig cfg;
  cfg.iterations = 15;
  cfg.jitter = 0.01;
  cfg.seed = 5;
  const auto a = recolor(in, target, cfg, p);
  const auto b = recolor(in, target, cfg, p);
  EXPECT_TRUE(a.image == b.image);
  cfg.seed = 6;
  EXPECT_FALSE(recolor(in, target, cfg, p).image == a.image);
}

TEST(Recolor, RejectsMismatchedTarget) {
  HistogramParams p;
  const ImageBuffer in = fx::fixture_input(8);
  EXPECT_THROW((void)recolor(in, fx::random_feature(16, 1), RecolorConfig{}, p), InvalidArgument);
}

TEST(Recolor, TraceCsv) {
  std::vector<LossBreakdown> trace(3);
  trace[2].total = 1.5;
  const auto csv = trace_to_csv(trace);
  EXPECT_EQ(csv.rfind("iteration,total,hist_term,recon_term,variance_term,hellinger_raw,w\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_NE(csv.find("\n2,1.5,"), std::string::npos);
}

TEST(VarianceLoss, ZeroWeightAndDisjointTargets) {
  const HistogramParams p;
  const ImageBuffer in = fx::random_image(9, 9, 41);
  const ImageBuffer out = fx::random_image(9, 9, 42);
  const auto h_in = compute_histogram(in, p);
  EXPECT_EQ(variance_loss(in, out, h_in, h_in, 2.0), 0.0);

  const auto a = fx::one_hot(64, 0);
  const auto b = fx::one_hot(64, 5000);
  EXPECT_DOUBLE_EQ(histogram_l1(a, b), 2.0);
  EXPECT_NEAR(variance_loss(in, out, a, b, 2.0), -2.0 * oracle::blurred_std_spread(in, out, 2.0), 1e-10);
}

TEST(Objective, ZeroAtIdentity) {
  const HistogramParams p;
  const ImageBuffer in = fx::fixture_input(16);
  const auto own = compute_histogram(in, p);
  const RecolorConfig cfg;
  const auto l = recolor_objective(in, in, own, cfg, p);
  EXPECT_LE(std::abs(l.hist_term), 1e-6);
  EXPECT_EQ(l.recon_term, 0.0);
  EXPECT_EQ(l.variance_term, 0.0);

  const auto g = recolor_objective_gradient(in, in, own, cfg, p);
  double norm = 0.0;
  for (const double v : g.total.data) {
    norm += v * v;
  }
  EXPECT_LT(std::sqrt(norm), 1e-4);
}

TEST(Objective, ZeroAlphaIgnoresTheTargetHistogram) {
  const HistogramParams p;
  const ImageBuffer in = fx::fixture_input(16);
  const ImageBuffer out = perturbed(in, 0.1, 8);
  RecolorConfig cfg;
  cfg.alpha = 0.0;
  cfg.variance_weight_scale = 0.0;
  const double a = recolor_objective(in, out, compute_histogram(fx::fixture_target_image(16), p), cfg, p).total;
  const double b = recolor_objective(in, out, fx::random_feature(64, 3), cfg, p).total;
  EXPECT_EQ(a, b);
}

TEST(Objective, EqualsSumOfOracleTerms) {
  const HistogramParams p;
  const ImageBuffer in = fx::fixture_input(16);
  const ImageBuffer out = perturbed(in, 0.08, 9);
  const auto target = compute_histogram(fx::fixture_target_image(16), p);
  RecolorConfig cfg;
  cfg.blur_sigma = 3.0;
  for (const auto kernel : {ReconKernel::laplacian, ReconKernel::sobel}) {
    cfg.recon_kernel = kernel;
    const auto l = recolor_objective(in, out, target, cfg, p);
    const std::vector<double> t(target.values().begin(), target.values().end());
    const auto h_out = oracle::histogram(out, p.bins, p.tau, p.epsilon, p.uv_min, p.uv_max);
    const auto h_in = oracle::histogram(in, p.bins, p.tau, p.epsilon, p.uv_min, p.uv_max);
    double w = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      w += std::abs(t[i] - h_in[i]);
    }
    const double recon =
        kernel == ReconKernel::laplacian ? oracle::laplacian_loss(in, out) : oracle::sobel_loss(in, out);
    const double expected = cfg.alpha * oracle::hellinger(h_out, t) + cfg.beta * recon -
                            cfg.variance_weight_scale * w * oracle::blurred_std_spread(in, out, cfg.blur_sigma);
    EXPECT_NEAR(l.total, expected, 1e-10) << to_string(kernel);
  }
}

TEST(ObjectiveGradient, DefaultsMatchCentralDifferences) {
  const HistogramParams p;
  const ImageBuffer in = fx::random_image(12, 12, 31, 0.1, 0.9);
  const ImageBuffer out = perturbed(in, 0.05, 32);
  const auto target = compute_histogram(fx::random_image(12, 12, 33, 0.1, 0.9), p);
  RecolorConfig cfg;
  cfg.blur_sigma = 2.0;
  const auto analytic = recolor_objective_gradient(in, out, target, cfg, p);
  const auto numeric = oracle::central_differences(
      out, [&](const ImageBuffer& im) { return recolor_objective(in, im, target, cfg, p).total; }, 1e-6);
  const auto cmp = oracle::compare_gradients(analytic.total.data, numeric, 1e-6);
  EXPECT_LT(cmp.max_relative, 1e-3);
  EXPECT_LT(cmp.max_small_absolute, 1e-6);
}

TEST(ObjectiveGradient, HistogramPartIsLinearInAlpha) {
  const HistogramParams p;
  const ImageBuffer in = fx::fixture_input(16);
  const ImageBuffer out = perturbed(in, 0.05, 10);
  const auto target = compute_histogram(fx::fixture_target_image(16), p);
  RecolorConfig cfg;
  const auto once = recolor_objective_gradient(in, out, target, cfg, p);
  cfg.alpha *= 2.0;
  const auto twice = recolor_objective_gradient(in, out, target, cfg, p);
  for (std::size_t i = 0; i < once.hist.data.size(); ++i) {
    ASSERT_EQ(twice.hist.data[i], 2.0 * once.hist.data[i]) << i;
  }
}
