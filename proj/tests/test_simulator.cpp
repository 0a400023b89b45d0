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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "car2/simulator.hpp"

using namespace car2;

namespace {

SimConfig config(double horizon, std::size_t n, std::uint64_t seed = 1,
                 std::uint64_t rep = 0, Scheme scheme = Scheme::Exact) {
  SimConfig c;
  c.horizon = horizon;
  c.n_steps = n;
  c.seed = seed;
  c.replication_index = rep;
  c.scheme = scheme;
  return c;
}

// Law of (X(T), V(T)) by composing n one-step kernels.
std::pair<Eigen::Vector2d, Eigen::Matrix2d> compose(const ModelParams& p,
                                                    double horizon,
                                                    std::size_t n) {
  const TransitionKernel k = transition(p, horizon / static_cast<double>(n));
  Eigen::Vector2d m(p.x0, p.dx0);
  Eigen::Matrix2d c = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    m = k.mean_matrix * m;
    c = k.mean_matrix * c * k.mean_matrix.transpose() +
        k.cov_matrix.bottomRightCorner<2, 2>();
  }
  return {m, c};
}

}  // namespace

TEST_CASE("noiseless free particle") {
  SamplePath a = simulate(ModelParams{0, 0, 0, 1, 0}, config(3.0, 1000));
  for (std::size_t i = 0; i <= 1000; ++i) {
    CHECK(a.x[i] == 1.0);
    CHECK(a.v[i] == 0.0);
  }
  // Dyadic step so that accumulating t_i is exact.
  SamplePath b = simulate(ModelParams{0, 0, 0, 0, 1}, config(1.0, 1024));
  for (std::size_t i = 0; i <= 1024; ++i) {
    CHECK(b.x[i] == b.t[i]);
    CHECK(b.v[i] == 1.0);
  }
  REQUIRE(b.dw);
  for (double d : *b.dw) CHECK(d == 0.0);
  SamplePath c = simulate(ModelParams{0, 0, 0, 0, 1}, config(2.0, 1000));
  for (std::size_t i = 0; i <= 1000; ++i)
    CHECK(c.x[i] == doctest::Approx(c.t[i]).epsilon(1e-12));
}

TEST_CASE("grid and lengths") {
  const SamplePath p = simulate(ModelParams{-1, -1, 1, 0, 0}, config(7.0, 333));
  CHECK(p.x.size() == 334);
  CHECK(p.v.size() == 334);
  CHECK(p.dw->size() == 333);
  CHECK(p.t.front() == 0.0);
  CHECK(p.t.back() == 7.0);
  const double h = 7.0 / 333;
  for (std::size_t i = 1; i < p.t.size(); ++i)
    CHECK(std::abs(p.t[i] - p.t[i - 1] - h) <= 1e-12 * h * 10);
  SimConfig quiet = config(1.0, 10);
  quiet.record_noise = false;
  CHECK_FALSE(simulate(ModelParams{}, quiet).dw.has_value());
  CHECK_THROWS_AS(simulate(ModelParams{}, config(0.0, 10)), InvalidArgument);
  CHECK_THROWS_AS(simulate(ModelParams{}, config(1.0, 0)), InvalidArgument);
  CHECK_THROWS_AS(simulate(ModelParams{0, 0, -1, 0, 0}, config(1.0, 10)), InvalidArgument);
}

TEST_CASE("determinism by seed and replication index") {
  const ModelParams p{0.5, -4.0625, 1, 1, 0};
  const SamplePath a = simulate(p, config(5, 500, 42, 7));
  const SamplePath b = simulate(p, config(5, 500, 42, 7));
  CHECK(a.x == b.x);
  CHECK(a.v == b.v);
  CHECK(*a.dw == *b.dw);
  const SamplePath c = simulate(p, config(5, 500, 42, 8));
  const SamplePath d = simulate(p, config(5, 500, 43, 7));
  CHECK(a.x != c.x);
  CHECK(a.x != d.x);
}

TEST_CASE("overflow is reported with its step") {
  try {
    simulate(ModelParams{3, -2, 1, 1, 0}, config(500, 5000));
    FAIL("expected overflow");
  } catch (const NumericOverflow& e) {
    // e^{2t} passes 1.8e308 near t = 355, i.e. step ~3550.
    CHECK(e.step() > 3000);
    CHECK(e.step() < 3700);
  }
}

TEST_CASE("composed kernels match the one-shot kernel") {
  // Ergodic T = 50: marginal law via 5000 steps vs a single step of 50.
  const ModelParams p{-3, -2, 1, 1.5, -0.5};
  const auto [m, c] = compose(p, 50, 5000);
  const TransitionKernel one = transition(p, 50.0);
  const Eigen::Vector2d m1 = one.mean_matrix * Eigen::Vector2d(p.x0, p.dx0);
  const Eigen::Matrix2d c1 = one.cov_matrix.bottomRightCorner<2, 2>();
  CHECK((c - c1).cwiseAbs().maxCoeff() < 1e-9 * c1.norm());
  CHECK((m - m1).norm() < 1e-9 * (1 + m1.norm()));

  // Step-size invariance at n = 10 and n = 1e4.
  const ModelParams q{0.5, -4.0625, 1, 1, 0};
  const auto a = compose(q, 3, 10);
  const auto b = compose(q, 3, 10000);
  CHECK((a.second - b.second).norm() < 1e-9 * a.second.norm());
  CHECK((a.first - b.first).norm() < 1e-9 * (1 + a.first.norm()));
}

TEST_CASE("free particle moments by Monte Carlo") {
  const std::size_t n_rep = 20000;
  const ModelParams p{0, 0, 1, 0, 0};
  double sx = 0, sxx = 0, sv = 0, svv = 0, sw = 0, sww = 0;
  for (std::size_t r = 0; r < n_rep; ++r) {
    const SamplePath path = simulate(p, config(1.0, 10, 5, r));
    const double x = path.x.back(), v = path.v.back();
    double w = 0;
    for (std::size_t i = 0; i < 5; ++i) w += (*path.dw)[i];  // W(0.5)
    sx += x; sxx += x * x; sv += v; svv += v * v; sw += w; sww += w * w;
  }
  const double n = static_cast<double>(n_rep);
  const double var_x = sxx / n - (sx / n) * (sx / n);
  const double var_v = svv / n - (sv / n) * (sv / n);
  const double var_w = sww / n - (sw / n) * (sw / n);
  // Standard errors of a normal variance: sqrt(2/n) s^2.
  CHECK(std::abs(var_x - 1.0 / 3) < 4 * std::sqrt(2 / n) / 3);
  CHECK(std::abs(var_v - 1.0) < 4 * std::sqrt(2 / n));
  CHECK(std::abs(var_w - 0.5) < 4 * std::sqrt(2 / n) * 0.5);
}

TEST_CASE("Euler converges weakly at order one") {
  // Deterministic moment recursion of the Euler chain against the exact law.
  const ModelParams p{-3, -2, 1, 1, 0};
  const double horizon = 5;
  const TransitionKernel exact = transition(p, horizon);
  const double mean_exact = exact.mean_matrix(0, 0) * p.x0;
  const double var_exact = exact.cov_matrix(1, 1);
  std::vector<double> err_mean, err_var;
  for (int e : {10, 12, 14}) {
    const std::size_t n = std::size_t{1} << e;
    const double h = horizon / static_cast<double>(n);
    Eigen::Matrix2d f;
    f << 1, h, p.theta2 * h, 1 + p.theta1 * h;
    Eigen::Vector2d m(p.x0, p.dx0);
    Eigen::Matrix2d c = Eigen::Matrix2d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      m = f * m;
      c = f * c * f.transpose();
      c(1, 1) += p.sigma * p.sigma * h;
    }
    err_mean.push_back(std::abs(m(0) - mean_exact));
    err_var.push_back(std::abs(c(0, 0) - var_exact));
  }
  for (std::size_t i = 0; i + 1 < err_var.size(); ++i) {
    const double order_m = std::log2(err_mean[i] / err_mean[i + 1]) / 2;
    const double order_v = std::log2(err_var[i] / err_var[i + 1]) / 2;
    CHECK(order_m == doctest::Approx(1.0).epsilon(0.1));
    CHECK(order_v == doctest::Approx(1.0).epsilon(0.1));
  }

  // The simulated Euler chain follows that recursion.
  const std::size_t n_rep = 4000;
  double s = 0, ss = 0;
  for (std::size_t r = 0; r < n_rep; ++r) {
    const SamplePath path = simulate(p, config(horizon, 1024, 9, r, Scheme::Euler));
    s += path.x.back();
    ss += path.x.back() * path.x.back();
  }
  const double nr = static_cast<double>(n_rep);
  const double mean = s / nr, var = ss / nr - mean * mean;
  CHECK(std::abs(mean - mean_exact) < 4 * std::sqrt(var_exact / nr) + err_mean[0]);
  CHECK(std::abs(var - var_exact) < 4 * std::sqrt(2 / nr) * var_exact + err_var[0]);
}

TEST_CASE("exact scheme matches its kernel in distribution") {
  const ModelParams p{-1, 2, 0.7, 0.3, 0};  // opposite-sign roots
  const double horizon = 2;
  const TransitionKernel k = transition(p, horizon);
  const double mean = k.mean_matrix(0, 0) * p.x0;
  const double var = k.cov_matrix(1, 1);
  const std::size_t n_rep = 10000;
  double s = 0, ss = 0;
  for (std::size_t r = 0; r < n_rep; ++r) {
    const double x = simulate(p, config(horizon, 20, 3, r)).x.back();
    s += x;
    ss += x * x;
  }
  const double nr = static_cast<double>(n_rep);
  const double m = s / nr, v = ss / nr - m * m;
  CHECK(std::abs(m - mean) < 4 * std::sqrt(var / nr));
  CHECK(std::abs(v - var) < 4 * std::sqrt(2 / nr) * var);
}

TEST_CASE("rescale_time") {
  const ModelParams p{-1, -2, 1, 0.5, 0.2};
  const SamplePath a = simulate(p, config(4, 400, 2));
  const SamplePath same = rescale_time(a, 1.0);
  CHECK(same.x == a.x);
  CHECK(same.t == a.t);

  const SamplePath lin = simulate(ModelParams{0, 0, 0, 0, 1}, config(2.0, 256));
  const SamplePath r = rescale_time(lin, 2.0);
  CHECK(r.horizon() == 1.0);
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    CHECK(r.x[i] == doctest::Approx(2 * r.t[i]));
    CHECK(r.v[i] == 2.0);
  }
  const SamplePath s = rescale_time(a, 4.0);
  CHECK(s.params.theta1 == -4.0);
  CHECK(s.params.theta2 == -32.0);
  CHECK(s.sigma == doctest::Approx(8.0));
  CHECK(s.params.dx0 == doctest::Approx(0.8));
  CHECK((*s.dw)[3] == doctest::Approx((*a.dw)[3] / 2));
  CHECK_THROWS_AS(rescale_time(a, 0.0), InvalidArgument);
}

TEST_CASE("CSV round trip is bit exact") {
  const SamplePath a = simulate(ModelParams{0.5, -4.0625, 1.3, 1, -2}, config(3, 300, 11));
  std::stringstream ss;
  write_path_csv(a, ss);
  const std::string text = ss.str();
  CHECK(text.rfind("t,x,v,dw\n", 0) == 0);
  const SamplePath b = read_path_csv(ss);
  CHECK(b.t == a.t);
  CHECK(b.x == a.x);
  CHECK(b.v == a.v);
  REQUIRE(b.dw);
  CHECK(*b.dw == *a.dw);

  SimConfig quiet = config(1, 10);
  quiet.record_noise = false;
  std::stringstream q;
  write_path_csv(simulate(ModelParams{}, quiet), q);
  CHECK_FALSE(read_path_csv(q).dw.has_value());

  std::stringstream bad("t,x,v,dw\n0,1,abc,\n1,1,1,\n");
  CHECK_THROWS_AS(read_path_csv(bad), InvalidArgument);
  std::stringstream header("a,b\n");
  CHECK_THROWS_AS(read_path_csv(header), InvalidArgument);
}

TEST_CASE("psd_factor reproduces the covariance") {
  const TransitionKernel k = transition(ModelParams{-3, -2, 1, 0, 0}, 0.01);
  const Eigen::Matrix3d l = psd_factor(k.cov_matrix);
  CHECK((l * l.transpose() - k.cov_matrix).norm() < 1e-12 * k.cov_matrix.norm());
  Eigen::Matrix3d bad = Eigen::Matrix3d::Identity();
  bad(2, 2) = -1;
  CHECK_THROWS(psd_factor(bad));
}
