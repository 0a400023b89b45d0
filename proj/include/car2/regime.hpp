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

#ifndef CAR2_REGIME_HPP
#define CAR2_REGIME_HPP

#include <functional>
#include <optional>
#include <string>

#include "car2/estimator.hpp"
#include "car2/model.hpp"

namespace car2 {

enum class NlrrAvailability { Yes, No, Theta1Only };

std::string_view to_string(NlrrAvailability a);

// Deterministic rates v1(T), v2(T) for theta1_hat and theta2_hat. The
// closures return log v so explosive rates never overflow.
struct RateSpec {
  RegimeTag tag{};
  std::function<double(double)> log_v1;
  std::function<double(double)> log_v2;
  std::string v1_expr;
  std::string v2_expr;
  std::string ld1;
  std::string ld2;
  NlrrAvailability nlrr = NlrrAvailability::No;
  std::string llr_label;

  double v1(double t) const { return std::exp(log_v1(t)); }
  double v2(double t) const { return std::exp(log_v2(t)); }
};

RateSpec rate_functions(const Regime& regime, const RootPair& roots);

struct NlrrRate {
  double r1 = 0;
  std::optional<double> r2;
  // False when the rate degenerates (zero or non-finite), e.g. X == 0.
  bool usable = false;
  // UnstableOscillation: no scalar rate; use scaling_matrix and B(x, y).
  bool matrix_form = false;
};

NlrrRate nlrr_rate(const Regime& regime, const RootPair& roots,
                   const SufficientStats& stats);

// A_T of the local likelihood structure, acting on (theta2, theta1).
Eigen::Matrix2d scaling_matrix(const Regime& regime, const RootPair& roots,
                               double t);

// B(x, y) = [[x, y], [-y, x]] / (x^2 + y^2).
Eigen::Matrix2d rotation_template(double x, double y);

// Scale of the Gaussian NLRR limit for coordinate 1, and the factor k with
// limit2 = k * limit1 where the two limits are coupled (absent otherwise).
struct NlrrLimit {
  double scale1 = 0;
  std::optional<double> scale2;
  std::optional<double> coupling;
};
NlrrLimit nlrr_limit(const Regime& regime, const RootPair& roots,
                     double sigma);

// Throws InvalidArgument when roots do not belong to regime.
void check_consistent(const Regime& regime, const RootPair& roots);

}  // namespace car2

#endif  // CAR2_REGIME_HPP
