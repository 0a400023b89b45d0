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

#ifndef CAR2_LIMIT_LAWS_HPP
#define CAR2_LIMIT_LAWS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "car2/model.hpp"
#include "car2/random.hpp"

namespace car2 {

// One draw of the limit of (v1 (theta1_hat - theta1), v2 (theta2_hat - theta2)).
struct LimitSample {
  double l1 = 0;
  double l2 = 0;
  RegimeTag tag{};
  std::size_t grid_n = 0;  // 0 for closed-form draws
};

// Functionals of standard Brownian motion on [0, 1]. dt-integrals by the
// trapezoid rule, stochastic integrals by left-point sums.
struct BrownianFunctionals {
  double w1_end = 0;
  double z1 = 0;      // int w
  double z2 = 0;      // int w^2
  double z3 = 0;      // int (int_0^t w)^2 dt
  double ito11 = 0;   // int w dw
  // Second motion, filled only when requested.
  double w2_end = 0;
  double levy = 0;    // int w1 dw2 - int w2 dw1
  double q11 = 0;     // int w1 dw1 + int w2 dw2
  double s2 = 0;      // int (w1^2 + w2^2)
};

inline constexpr std::size_t kMinFunctionalGrid = 1000;

BrownianFunctionals brownian_functionals(std::size_t grid_n, Rng& rng,
                                         bool two_bm);
BrownianFunctionals brownian_functionals(std::size_t grid_n,
                                         std::uint64_t seed,
                                         std::uint64_t index, bool two_bm);
// Same functionals from given increments over a uniform grid of [0, 1].
// dw2 may be empty.
BrownianFunctionals functionals_from_increments(const std::vector<double>& dw1,
                                                const std::vector<double>& dw2);

// (l1, l2) in the four Brownian-functional regimes; eta is only read for
// LargerRootZero.
LimitSample functional_limit(RegimeTag tag, const RootPair& roots,
                             const BrownianFunctionals& f, double eta);

struct LimitOptions {
  std::size_t grid_n = 10000;
  // UnstableOscillation only: phase 2 nu T mod 2 pi of the subsequence.
  std::optional<double> phase;
};

// Draw number `index` of the limit law; a pure function of its arguments.
LimitSample sample_limit_one(const Regime& regime, const RootPair& roots,
                             const ModelParams& params,
                             const LimitOptions& opts, std::uint64_t seed,
                             std::uint64_t index);

std::vector<LimitSample> sample_limit(const Regime& regime,
                                      const RootPair& roots,
                                      const ModelParams& params, std::size_t n,
                                      const LimitOptions& opts,
                                      std::uint64_t seed,
                                      unsigned threads = 1);

// Oscillating explosive case. With kappa = u_c - i u_s and the end-window
// noise (h_c, h_s), the residual exp(lambda T)(theta_hat - theta) is a
// rational function of these four Gaussians and the phase.
struct OscillationInputs {
  double u_c = 0;
  double u_s = 0;
  double h_c = 0;
  double h_s = 0;
};

// Returns (l1, l2) for theta1 and theta2.
Eigen::Vector2d oscillation_limit(double lambda, double nu, double sigma,
                                  double phase, const OscillationInputs& in);

// Mean and covariance of (u_c, u_s) and covariance of (h_c, h_s).
Eigen::Vector2d oscillation_u_mean(const ModelParams& params, double lambda,
                                   double nu);
Eigen::Matrix2d oscillation_u_cov(double lambda, double nu, double sigma);
Eigen::Matrix2d oscillation_h_cov(double lambda, double nu, double phase);

// (u_c, u_s, h_c, h_s) evaluated on a path from its recorded increments.
struct SamplePath;
OscillationInputs oscillation_inputs(const SamplePath& path, double lambda,
                                     double nu);

}  // namespace car2

#endif  // CAR2_LIMIT_LAWS_HPP
