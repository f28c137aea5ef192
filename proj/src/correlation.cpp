#include "pcqa/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pcqa {

namespace {

void check_lengths(Eigen::Index nx, Eigen::Index ny, const char* who) {
  if (nx != ny) throw std::invalid_argument(std::string(who) + ": length mismatch");
  if (nx < 2) throw std::invalid_argument(std::string(who) + ": needs at least 2 samples");
}

}  // namespace

double plcc(const Eigen::Ref<const Eigen::VectorXd>& x,
            const Eigen::Ref<const Eigen::VectorXd>& y) {
  check_lengths(x.size(), y.size(), "plcc");
  const double mx = x.mean();
  const double my = y.mean();
  const Eigen::ArrayXd dx = x.array() - mx;
  const Eigen::ArrayXd dy = y.array() - my;
  const double sxx = (dx * dx).sum();
  const double syy = (dy * dy).sum();
  if (sxx == 0.0 || syy == 0.0)
    throw std::domain_error("plcc: undefined for zero-variance input");
  return (dx * dy).sum() / std::sqrt(sxx * syy);
}

Eigen::VectorXd fractional_ranks(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const Eigen::Index n = v.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::sort(idx.begin(), idx.end(),
            [&](Eigen::Index a, Eigen::Index b) { return v[a] < v[b]; });
  Eigen::VectorXd ranks(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && v[idx[static_cast<std::size_t>(j + 1)]] == v[idx[static_cast<std::size_t>(i)]])
      ++j;
    // positions i..j (0-based) share the value; average of 1-based ranks
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (Eigen::Index t = i; t <= j; ++t) ranks[idx[static_cast<std::size_t>(t)]] = r;
    i = j + 1;
  }
  return ranks;
}

double srocc(const Eigen::Ref<const Eigen::VectorXd>& x,
             const Eigen::Ref<const Eigen::VectorXd>& y) {
  check_lengths(x.size(), y.size(), "srocc");
  return plcc(fractional_ranks(x), fractional_ranks(y));
}

double rmse(const Eigen::Ref<const Eigen::VectorXd>& predicted,
            const Eigen::Ref<const Eigen::VectorXd>& actual) {
  if (predicted.size() != actual.size())
    throw std::invalid_argument("rmse: length mismatch");
  if (predicted.size() == 0) throw std::invalid_argument("rmse: empty input");
  return std::sqrt((predicted - actual).squaredNorm() /
                   static_cast<double>(predicted.size()));
}

double plcc(const std::vector<double>& x, const std::vector<double>& y) {
  return plcc(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())),
              Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())));
}

double srocc(const std::vector<double>& x, const std::vector<double>& y) {
  return srocc(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())),
               Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())));
}

double rmse(const std::vector<double>& predicted, const std::vector<double>& actual) {
  return rmse(Eigen::Map<const Eigen::VectorXd>(predicted.data(),
                                                static_cast<Eigen::Index>(predicted.size())),
              Eigen::Map<const Eigen::VectorXd>(actual.data(),
                                                static_cast<Eigen::Index>(actual.size())));
}

}  // namespace pcqa
