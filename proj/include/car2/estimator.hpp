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

#ifndef CAR2_ESTIMATOR_HPP
#define CAR2_ESTIMATOR_HPP

#include <span>

#include "car2/model.hpp"
#include "car2/simulator.hpp"

namespace car2 {

struct SufficientStats {
  double sxx = 0;   // int X^2 dt
  double svv = 0;   // int V^2 dt
  double sxv = 0;   // int X V dt
  double ixdv = 0;  // int X dV
  double ivdv = 0;  // int V dV
  double horizon = 0;
  double x_start = 0, v_start = 0, x_end = 0, v_end = 0;
  double sigma = 0;
  std::size_t n_steps = 0;

  Eigen::Matrix2d psi() const {
    Eigen::Matrix2d m;
    m << sxx, sxv, sxv, svv;
    return m;
  }
  // (int X dV, int V dV), matching the (theta2, theta1) ordering.
  Eigen::Vector2d score() const { return {ixdv, ivdv}; }
};

struct Estimate {
  double theta1_hat = 0;
  double theta2_hat = 0;
  double det_d = 0;
  Eigen::Matrix2d psi = Eigen::Matrix2d::Zero();
  // D / (SXX SVV): one for orthogonal designs, tiny when X and V align.
  double design_rcond = 0;
  bool ill_conditioned = false;

  Eigen::Vector2d theta_vector() const { return {theta2_hat, theta1_hat}; }
};

inline constexpr double kSingularTol = 1e-12;
inline constexpr double kIllConditioned = 1e-10;

// Trapezoid for SXX and SVV, closed identities for the other three.
SufficientStats sufficient_stats(const SamplePath& path);

Estimate mle(const SufficientStats& stats);

// sqrt of the realized quadratic variation of V over the horizon.
double estimate_sigma(const SamplePath& path);

// L_T(alt) relative to the reference measure of theta_ref; both vectors in
// (theta2, theta1) order.
double log_likelihood_ratio(const SufficientStats& stats,
                            const Eigen::Vector2d& theta_ref,
                            const Eigen::Vector2d& theta_alt);

double normalized_llr(const SufficientStats& stats,
                      const Eigen::Vector2d& theta, const Eigen::Matrix2d& a_t,
                      const Eigen::Vector2d& u);

// Discrete D(T; f, g) with every dt-integral as a trapezoid sum.
double design_determinant(std::span<const double> f, std::span<const double> g,
                          double h);
// Discrete N(T; f, g) = int f^2 int g sigma dW - int fg int f sigma dW.
double noise_numerator(std::span<const double> f, std::span<const double> g,
                       std::span<const double> dw, double h, double sigma);

// Statistics with dV rebuilt from the true drift and the recorded noise,
// (theta2 X + theta1 V) h + sigma dw per step. Used by the residual oracle.
SufficientStats reconstructed_stats(const SamplePath& path,
                                    const ModelParams& truth);

// (N(X,V)/D, N(V,X)/D): the residuals theta1_hat - theta1, theta2_hat - theta2
// expressed through the noise alone.
Eigen::Vector2d residual_oracle(const SamplePath& path,
                                const ModelParams& truth);

}  // namespace car2

#endif  // CAR2_ESTIMATOR_HPP
