#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pcqa/correlation.hpp"
#include "pcqa/errors.hpp"
#include "pcqa/logistic.hpp"
#include "pcqa/synth.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace {

Eigen::VectorXd grid(double lo, double hi, Eigen::Index n) {
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i)
    q[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return q;
}

double fit_plcc(const pcqa::LogisticFit& fit, const Eigen::VectorXd& mos) {
  return pcqa::plcc(fit.predicted, mos);
}

}  // namespace

TEST_CASE("noise-free data from a known curve is recovered") {
  const Eigen::Vector4d beta(5.0, 1.0, 0.0, 1.0);
  const Eigen::VectorXd q = grid(-5.0, 5.0, 20);
  const Eigen::VectorXd mos = pcqa::logistic_eval(beta, q);
  const auto fit = pcqa::logistic_fit(q, mos);
  CHECK(pcqa::rmse(fit.predicted, mos) < 1e-6);
  CHECK(fit.iterations <= 500);
  CHECK_FALSE(fit.used_grid_fallback);
}

TEST_CASE("decreasing curves are recovered through the sign-aware start") {
  const Eigen::Vector4d beta(4.5, 1.5, 2.0, -0.8);
  const Eigen::VectorXd q = grid(-3.0, 7.0, 24);
  const Eigen::VectorXd mos = pcqa::logistic_eval(beta, q);
  const auto fit = pcqa::logistic_fit(q, mos);
  CHECK(pcqa::rmse(fit.predicted, mos) < 1e-6);
}

TEST_CASE("gaussian score noise still yields a tight fit") {
  const Eigen::Vector4d beta(5.0, 1.0, 0.0, 1.0);
  const Eigen::VectorXd q = grid(-5.0, 5.0, 40);
  Eigen::VectorXd mos = pcqa::logistic_eval(beta, q);
  pcqa::SeededRng rng(2024);
  for (Eigen::Index i = 0; i < mos.size(); ++i) mos[i] += 0.1 * rng.next_gaussian();
  const auto fit = pcqa::logistic_fit(q, mos);
  CHECK(fit_plcc(fit, mos) >= 0.99);
}

TEST_CASE("constant mos fits with zero residual") {
  const Eigen::VectorXd q = grid(0.0, 9.0, 10);
  const Eigen::VectorXd mos = Eigen::VectorXd::Constant(10, 3.25);
  const auto fit = pcqa::logistic_fit(q, mos);
  CHECK(pcqa::rmse(fit.predicted, mos) < 1e-9);
}

TEST_CASE("a two-level staircase fits at least as well as a grid-search oracle") {
  const Eigen::Index n = 20;
  Eigen::VectorXd q(n), mos(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    q[i] = static_cast<double>(i + 1);
    mos[i] = q[i] <= 10.0 ? 2.0 : 4.0;
  }
  const auto fit = pcqa::logistic_fit(q, mos);

  // independent coarse search over the transition point and slope with the
  // asymptotes pinned at the data extremes
  double best_sse = std::numeric_limits<double>::infinity();
  for (double b3 = 1.0; b3 <= 20.0; b3 += 0.25) {
    for (double b4 : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0}) {
      const Eigen::VectorXd pred =
          pcqa::logistic_eval(Eigen::Vector4d(4.0, 2.0, b3, b4), q);
      const double sse = (pred - mos).squaredNorm();
      best_sse = std::min(best_sse, sse);
    }
  }
  CHECK(fit.sse <= best_sse + 1e-12);
  CHECK(fit_plcc(fit, mos) >= 0.999);
}

TEST_CASE("post-fit pearson is invariant under affine rescaling of the scores") {
  const Eigen::Vector4d beta(4.8, 1.2, 1.0, 2.0);
  const Eigen::VectorXd q = grid(-6.0, 8.0, 30);
  Eigen::VectorXd mos = pcqa::logistic_eval(beta, q);
  pcqa::SeededRng rng(5);
  for (Eigen::Index i = 0; i < mos.size(); ++i) mos[i] += 0.05 * rng.next_gaussian();

  const auto base = pcqa::logistic_fit(q, mos);
  const Eigen::VectorXd scaled = (q.array() * 3.0 + 7.0).matrix();
  const auto shifted = pcqa::logistic_fit(scaled, mos);
  CHECK(std::abs(fit_plcc(base, mos) - fit_plcc(shifted, mos)) <= 1e-6);
}

TEST_CASE("predictions stay between the fitted asymptotes") {
  const Eigen::VectorXd q = grid(0.0, 10.0, 15);
  Eigen::VectorXd mos(15);
  pcqa::SeededRng rng(8);
  for (Eigen::Index i = 0; i < 15; ++i)
    mos[i] = 1.0 + 4.0 / (1.0 + std::exp(-(q[i] - 5.0))) + 0.1 * rng.next_gaussian();
  const auto fit = pcqa::logistic_fit(q, mos);
  const double lo = std::min(fit.beta[0], fit.beta[1]);
  const double hi = std::max(fit.beta[0], fit.beta[1]);
  for (Eigen::Index i = 0; i < fit.predicted.size(); ++i) {
    CHECK(fit.predicted[i] >= lo - 1e-12);
    CHECK(fit.predicted[i] <= hi + 1e-12);
  }
}

TEST_CASE("the curve itself is monotone between the asymptotes") {
  const Eigen::Vector4d beta(5.0, 1.0, 2.0, 1.5);
  double prev = pcqa::logistic_eval(beta, -10.0);
  for (double x = -9.5; x <= 12.0; x += 0.5) {
    const double cur = pcqa::logistic_eval(beta, x);
    CHECK(cur >= prev);
    prev = cur;
  }
}

TEST_CASE("degenerate fits are rejected") {
  const Eigen::VectorXd q4 = grid(0.0, 3.0, 4);
  const Eigen::VectorXd mos4 = q4;
  CHECK_THROWS_AS(pcqa::logistic_fit(q4, mos4), pcqa::FitError);

  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(8, 2.0);
  const Eigen::VectorXd mos8 = grid(1.0, 5.0, 8);
  CHECK_THROWS_AS(pcqa::logistic_fit(flat, mos8), pcqa::FitError);

  const Eigen::VectorXd q8 = grid(0.0, 7.0, 8);
  CHECK_THROWS_AS(pcqa::logistic_fit(q8, grid(1.0, 5.0, 7)), pcqa::FitError);

  Eigen::VectorXd bad = q8;
  bad[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(pcqa::logistic_fit(bad, mos8), pcqa::FitError);
}
