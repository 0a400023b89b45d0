// Copyright 2026 The car2lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "car2/estimator.hpp"

#include <algorithm>
#include <cmath>

namespace car2 {

namespace {

// Neumaier compensated sum; horizons of 1e6 steps are routine here.
class Sum {
 public:
  void add(double v) {
    const double t = s_ + v;
    c_ += std::abs(s_) >= std::abs(v) ? (s_ - t) + v : (v - t) + s_;
    s_ = t;
  }
  double value() const { return s_ + c_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

template <typename F>
double trapezoid(std::size_t n, double h, F&& f) {
  Sum s;
  for (std::size_t i = 1; i < n; ++i) s.add(f(i));
  s.add(0.5 * f(0));
  s.add(0.5 * f(n));
  return h * s.value();
}

void check_path(const SamplePath& path) {
  const std::size_t n = path.n_steps();
  if (n < 2) throw InvalidArgument("estimator: path needs at least 2 steps");
  if (path.v.size() != n + 1 || path.t.size() != n + 1)
    throw InvalidArgument("estimator: inconsistent path lengths");
  for (std::size_t i = 0; i <= n; ++i)
    if (!std::isfinite(path.x[i]) || !std::isfinite(path.v[i]))
      throw InvalidArgument("estimator: non-finite sample at index " +
                            std::to_string(i));
}

const std::vector<double>& require_dw(const SamplePath& path) {
  if (!path.dw) throw InvalidArgument("residual oracle: path has no recorded dw");
  if (path.dw->size() != path.n_steps())
    throw InvalidArgument("residual oracle: dw length mismatch");
  return *path.dw;
}

}  // namespace

SufficientStats sufficient_stats(const SamplePath& path) {
  check_path(path);
  const std::size_t n = path.n_steps();
  const double h = path.step();
  const auto& x = path.x;
  const auto& v = path.v;

  SufficientStats s;
  s.n_steps = n;
  s.horizon = path.horizon();
  s.sigma = path.sigma;
  s.x_start = x.front();
  s.v_start = v.front();
  s.x_end = x.back();
  s.v_end = v.back();
  s.sxx = trapezoid(n, h, [&](std::size_t i) { return x[i] * x[i]; });
  s.svv = trapezoid(n, h, [&](std::size_t i) { return v[i] * v[i]; });
  s.sxv = 0.5 * (s.x_end * s.x_end - s.x_start * s.x_start);
  s.ivdv = 0.5 * (s.v_end * s.v_end - s.sigma * s.sigma * s.horizon -
                  s.v_start * s.v_start);
  s.ixdv = s.x_end * s.v_end - s.x_start * s.v_start - s.svv;
  return s;
}

Estimate mle(const SufficientStats& s) {
  const double d = s.sxx * s.svv - s.sxv * s.sxv;
  const double threshold = kSingularTol * std::max(s.sxx * s.svv, 1.0);
  if (!(d > threshold)) throw SingularDesign(d, threshold);

  Estimate e;
  e.det_d = d;
  e.theta1_hat = (s.sxx * s.ivdv - s.sxv * s.ixdv) / d;
  e.theta2_hat = (s.svv * s.ixdv - s.sxv * s.ivdv) / d;
  e.psi = s.psi();
  e.design_rcond = d / (s.sxx * s.svv);
  e.ill_conditioned = e.design_rcond < kIllConditioned;
  return e;
}

double estimate_sigma(const SamplePath& path) {
  check_path(path);
  Sum qv;
  for (std::size_t i = 0; i + 1 < path.v.size(); ++i) {
    const double dv = path.v[i + 1] - path.v[i];
    qv.add(dv * dv);
  }
  return std::sqrt(qv.value() / path.horizon());
}

double log_likelihood_ratio(const SufficientStats& s,
                            const Eigen::Vector2d& theta_ref,
                            const Eigen::Vector2d& theta_alt) {
  if (!(s.sigma > 0))
    throw InvalidArgument("log_likelihood_ratio: undefined for sigma = 0");
  const double s2 = s.sigma * s.sigma;
  const Eigen::Matrix2d psi = s.psi();
  const double linear = (theta_alt - theta_ref).dot(s.score());
  const double quad = theta_alt.dot(psi * theta_alt) - theta_ref.dot(psi * theta_ref);
  return linear / s2 - quad / (2.0 * s2);
}

double normalized_llr(const SufficientStats& s, const Eigen::Vector2d& theta,
                      const Eigen::Matrix2d& a_t, const Eigen::Vector2d& u) {
  return log_likelihood_ratio(s, theta, theta + a_t * u);
}

double design_determinant(std::span<const double> f, std::span<const double> g,
                          double h) {
  if (f.size() != g.size() || f.size() < 2)
    throw InvalidArgument("design_determinant: need equal lengths >= 2");
  const std::size_t n = f.size() - 1;
  const double ff = trapezoid(n, h, [&](std::size_t i) { return f[i] * f[i]; });
  const double gg = trapezoid(n, h, [&](std::size_t i) { return g[i] * g[i]; });
  const double fg = trapezoid(n, h, [&](std::size_t i) { return f[i] * g[i]; });
  return ff * gg - fg * fg;
}

double noise_numerator(std::span<const double> f, std::span<const double> g,
                       std::span<const double> dw, double h, double sigma) {
  if (f.size() != g.size() || f.size() < 2 || dw.size() + 1 != f.size())
    throw InvalidArgument("noise_numerator: inconsistent lengths");
  const std::size_t n = f.size() - 1;
  const double ff = trapezoid(n, h, [&](std::size_t i) { return f[i] * f[i]; });
  const double fg = trapezoid(n, h, [&](std::size_t i) { return f[i] * g[i]; });
  Sum mf, mg;
  for (std::size_t i = 0; i < n; ++i) {
    mf.add(f[i] * dw[i]);
    mg.add(g[i] * dw[i]);
  }
  return ff * sigma * mg.value() - fg * sigma * mf.value();
}

namespace {

struct NoiseSums {
  double x = 0;  // sum X_i dw_i
  double v = 0;  // sum V_i dw_i
};

NoiseSums noise_sums(const SamplePath& path) {
  const auto& dw = require_dw(path);
  Sum sx, sv;
  for (std::size_t i = 0; i < dw.size(); ++i) {
    sx.add(path.x[i] * dw[i]);
    sv.add(path.v[i] * dw[i]);
  }
  return {sx.value(), sv.value()};
}

}  // namespace

SufficientStats reconstructed_stats(const SamplePath& path,
                                    const ModelParams& truth) {
  SufficientStats s = sufficient_stats(path);
  const NoiseSums m = noise_sums(path);
  s.ixdv = truth.theta2 * s.sxx + truth.theta1 * s.sxv + path.sigma * m.x;
  s.ivdv = truth.theta2 * s.sxv + truth.theta1 * s.svv + path.sigma * m.v;
  return s;
}

// The true drift cancels from N/D, so only the noise and the design enter.
Eigen::Vector2d residual_oracle(const SamplePath& path, const ModelParams&) {
  const SufficientStats s = sufficient_stats(path);
  const NoiseSums m = noise_sums(path);
  const double d = s.sxx * s.svv - s.sxv * s.sxv;
  const double threshold = kSingularTol * std::max(s.sxx * s.svv, 1.0);
  if (!(d > threshold)) throw SingularDesign(d, threshold);
  const double sig = path.sigma;
  const double n_xv = s.sxx * sig * m.v - s.sxv * sig * m.x;
  const double n_vx = s.svv * sig * m.x - s.sxv * sig * m.v;
  return {n_xv / d, n_vx / d};
}

}  // namespace car2
