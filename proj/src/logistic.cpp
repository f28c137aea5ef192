#include "pcqa/logistic.hpp"

#include "pcqa/correlation.hpp"
#include "pcqa/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace pcqa {

namespace {

constexpr int kMaxIterations = 500;
constexpr double kRelTolerance = 1e-10;
constexpr double kLambdaInit = 1e-3;
constexpr double kLambdaMax = 1e12;

double sigmoid(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double sse_at(const Eigen::Vector4d& beta, const Eigen::Ref<const Eigen::VectorXd>& q,
              const Eigen::Ref<const Eigen::VectorXd>& mos) {
  double sse = 0.0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const double r = logistic_eval(beta, q[i]) - mos[i];
    sse += r * r;
  }
  return sse;
}

struct LmOutcome {
  Eigen::Vector4d beta;
  double sse = 0.0;
  int iterations = 0;
  bool any_accepted = false;
};

LmOutcome lm_run(Eigen::Vector4d beta, const Eigen::Ref<const Eigen::VectorXd>& q,
                 const Eigen::Ref<const Eigen::VectorXd>& mos) {
  const Eigen::Index n = q.size();
  LmOutcome out;
  out.beta = beta;
  out.sse = sse_at(beta, q, mos);
  double lambda = kLambdaInit;
  Eigen::MatrixXd jac(n, 4);
  Eigen::VectorXd residual(n);
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    out.iterations = iter + 1;
    const double spread = out.beta[0] - out.beta[1];
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = (q[i] - out.beta[2]) / out.beta[3];
      const double s = sigmoid(t);
      residual[i] = out.beta[1] + spread * s - mos[i];
      const double slope = spread * s * (1.0 - s) / out.beta[3];
      jac(i, 0) = s;
      jac(i, 1) = 1.0 - s;
      jac(i, 2) = -slope;
      jac(i, 3) = -slope * t;
    }
    const Eigen::Matrix4d jtj = jac.transpose() * jac;
    const Eigen::Vector4d g = jac.transpose() * residual;
    bool stepped = false;
    while (lambda <= kLambdaMax) {
      Eigen::Matrix4d damped = jtj;
      for (int d = 0; d < 4; ++d)
        damped(d, d) += lambda * std::max(jtj(d, d), 1e-12);
      const Eigen::Vector4d delta = damped.ldlt().solve(-g);
      const Eigen::Vector4d trial = out.beta + delta;
      const double trial_sse =
          (delta.allFinite() && trial[3] != 0.0) ? sse_at(trial, q, mos)
                                                 : std::numeric_limits<double>::infinity();
      if (std::isfinite(trial_sse) && trial_sse < out.sse) {
        const double drop = out.sse - trial_sse;
        out.beta = trial;
        const double prev = out.sse;
        out.sse = trial_sse;
        out.any_accepted = true;
        lambda = std::max(lambda / 3.0, 1e-12);
        stepped = true;
        if (prev == 0.0 || drop <= kRelTolerance * std::max(prev, 1e-300)) return out;
        break;
      }
      lambda *= 3.0;
    }
    if (!stepped) return out;  // no acceptable step at any damping
    if (out.sse == 0.0) return out;
  }
  return out;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace

double logistic_eval(const Eigen::Vector4d& beta, double q) {
  return beta[1] + (beta[0] - beta[1]) * sigmoid((q - beta[2]) / beta[3]);
}

Eigen::VectorXd logistic_eval(const Eigen::Vector4d& beta,
                              const Eigen::Ref<const Eigen::VectorXd>& q) {
  Eigen::VectorXd out(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) out[i] = logistic_eval(beta, q[i]);
  return out;
}

LogisticFit logistic_fit(const Eigen::Ref<const Eigen::VectorXd>& q,
                         const Eigen::Ref<const Eigen::VectorXd>& mos) {
  const Eigen::Index n = q.size();
  if (n != mos.size()) throw FitError("logistic_fit: length mismatch");
  if (n < 5) throw FitError("logistic_fit: needs at least 5 samples, have " +
                            std::to_string(n));
  if (!q.allFinite() || !mos.allFinite())
    throw FitError("logistic_fit: non-finite input");
  const double q_mean = q.mean();
  const double q_var = (q.array() - q_mean).square().sum() / static_cast<double>(n);
  if (q_var == 0.0) throw FitError("logistic_fit: all scores are equal");
  const double q_std = std::sqrt(q_var);

  Eigen::Vector4d beta0;
  beta0[0] = mos.maxCoeff();
  beta0[1] = mos.minCoeff();
  beta0[2] = median_of(std::vector<double>(q.data(), q.data() + n));
  beta0[3] = q_std / 4.0;
  // orientation: when higher scores mean lower MOS the slope flips
  try {
    if (srocc(q, mos) < 0.0) beta0[3] = -beta0[3];
  } catch (const std::domain_error&) {
    // constant MOS: orientation is irrelevant
  }

  LmOutcome best = lm_run(beta0, q, mos);
  bool grid_used = false;
  if (!best.any_accepted && best.sse > 0.0) {
    // divergent start: coarse grid over center and slope, then retry
    grid_used = true;
    std::vector<double> sorted(q.data(), q.data() + n);
    std::sort(sorted.begin(), sorted.end());
    Eigen::Vector4d g_best = beta0;
    double g_sse = best.sse;
    for (int ci = 0; ci < 13; ++ci) {
      const double b3 =
          sorted[static_cast<std::size_t>((static_cast<double>(ci) / 12.0) *
                                          static_cast<double>(n - 1))];
      for (const double scale : {0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0}) {
        for (const double sign : {1.0, -1.0}) {
          Eigen::Vector4d cand = beta0;
          cand[2] = b3;
          cand[3] = sign * scale * q_std;
          const double s = sse_at(cand, q, mos);
          if (std::isfinite(s) && s < g_sse) {
            g_sse = s;
            g_best = cand;
          }
        }
      }
    }
    const LmOutcome retry = lm_run(g_best, q, mos);
    if (retry.sse < best.sse) best = retry;
  }

  LogisticFit fit;
  fit.beta = best.beta;
  fit.predicted = logistic_eval(best.beta, q);
  fit.sse = best.sse;
  fit.iterations = best.iterations;
  fit.used_grid_fallback = grid_used;
  return fit;
}

}  // namespace pcqa
