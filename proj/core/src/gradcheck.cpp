// SPDX-License-Identifier: Apache-2.0
#include "dmqca/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dmqca {

namespace {

std::vector<std::size_t> pick_entries(std::size_t n, const GradCheckOptions& opt) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (opt.max_entries && *opt.max_entries < n) {
    std::mt19937_64 rng(opt.seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(*opt.max_entries);
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

}  // namespace

double finite_diff_check_param(const std::function<Var()>& loss, Var& param,
                               const GradCheckOptions& options) {
  param.zero_grad();
  backward(loss());
  const Tensor analytic = param.grad();
  param.zero_grad();

  NoGradGuard no_grad;
  Tensor& value = param.mutable_value();
  const auto numeric_at = [&](std::size_t i, double eps) {
    const double saved = value[i];
    value[i] = saved + eps;
    const double up = loss().value().item();
    value[i] = saved - eps;
    const double down = loss().value().item();
    value[i] = saved;
    return (up - down) / (2.0 * eps);
  };
  double worst = 0.0;
  for (std::size_t i : pick_entries(value.size(), options)) {
    double err = relative_error(analytic[i], numeric_at(i, options.epsilon));
    if (err > options.retry_above) {
      for (double eps : options.retry_epsilons)
        err = std::min(err, relative_error(analytic[i], numeric_at(i, eps)));
    }
    worst = std::max(worst, err);
  }
  return worst;
}

double finite_diff_check(const std::function<Var(const Var&)>& f, const Tensor& x,
                         const GradCheckOptions& options) {
  Var input = Var::parameter(x);
  return finite_diff_check_param([&] { return f(input); }, input, options);
}

}  // namespace dmqca
