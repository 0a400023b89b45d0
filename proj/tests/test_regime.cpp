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
#include <map>
#include <string>

#include "car2/regime.hpp"

using namespace car2;

namespace {

struct Row {
  RegimeTag tag;
  double theta1, theta2;
  const char* v1;
  const char* v2;
  const char* ld1;
  const char* ld2;
  const char* nlrr;
  const char* llr;
};

// Literal transcription of the estimation table.
const Row kTable[] = {
    {RegimeTag::Ergodic, -3, -2, "sqrt(T*|theta1|)", "sqrt(T*|theta1|)", "Normal", "Normal", "Yes", "LAN"},
    {RegimeTag::OppositeSign, -1, 2, "sqrt(|q|*T)", "sqrt(|q|*T)", "Normal", "Normal", "Yes", "DLAMN"},
    {RegimeTag::DistinctPositive, 3, -2, "exp(q*T)", "exp(q*T)", "Cauchy-type", "Cauchy-type", "Yes", "DLAMN"},
    {RegimeTag::PositiveDouble, 2, -1, "exp(q*T)/(q*T)", "exp(q*T)/(q*T)", "Cauchy-type", "Cauchy-type", "Yes", "DLAMN"},
    {RegimeTag::LargerRootZero, -2, 0, "sqrt(|theta1|*T)", "T", "Normal", "F1(w)", "theta1-only", "LABF/LAN"},
    {RegimeTag::SmallerRootZero, 0.5, 0, "theta1*T", "T", "F1(w)", "F1(w)", "No", "DLAMN"},
    {RegimeTag::ZeroDouble, 0, 0, "T", "T^2", "F1(w)", "F1(w)", "No", "LABF"},
    {RegimeTag::Harmonic, 0, -1, "T", "T", "F2(w)", "F2(w)", "No", "LABF"},
    {RegimeTag::UnstableOscillation, 0.5, -4.0625, "exp(lambda*T)", "exp(lambda*T)", "Many", "Many", "Yes", "LAMN-family"},
};

std::pair<Regime, RootPair> setup(double t1, double t2) {
  const RootPair r = char_roots(t1, t2);
  return {classify(r, default_tolerance(t1, t2)), r};
}

SufficientStats fake_stats(double sxx, double svv, double sxv, double horizon) {
  SufficientStats s;
  s.sxx = sxx;
  s.svv = svv;
  s.sxv = sxv;
  s.horizon = horizon;
  s.sigma = 1;
  return s;
}

}  // namespace

TEST_CASE("registry matches the table literal, one row per tag") {
  std::map<RegimeTag, int> seen;
  for (const Row& row : kTable) {
    INFO(to_string(row.tag));
    const auto [reg, roots] = setup(row.theta1, row.theta2);
    REQUIRE(reg.tag == row.tag);
    const RateSpec r = rate_functions(reg, roots);
    CHECK(r.tag == row.tag);
    CHECK(r.v1_expr == row.v1);
    CHECK(r.v2_expr == row.v2);
    CHECK(r.ld1 == row.ld1);
    CHECK(r.ld2 == row.ld2);
    CHECK(to_string(r.nlrr) == row.nlrr);
    CHECK(r.llr_label == row.llr);
    ++seen[row.tag];
  }
  CHECK(seen.size() == kAllRegimes.size());
  for (auto [tag, n] : seen) CHECK(n == 1);
}

TEST_CASE("rate examples") {
  {
    const auto [reg, roots] = setup(-3, -2);
    const RateSpec r = rate_functions(reg, roots);
    for (double t : {1.0, 7.5, 200.0}) CHECK(r.v1(t) == doctest::Approx(std::sqrt(3 * t)));
  }
  {
    const auto [reg, roots] = setup(2, -1);
    const RateSpec r = rate_functions(reg, roots);
    for (double t : {1.0, 3.0, 10.0}) CHECK(r.v1(t) == doctest::Approx(std::exp(t) / t));
  }
  {
    const auto [reg, roots] = setup(0, 0);
    const RateSpec r = rate_functions(reg, roots);
    CHECK(r.v1(7) == doctest::Approx(7));
    CHECK(r.v2(7) == doctest::Approx(49));
  }
  {
    const auto [reg, roots] = setup(3, -2);  // q = 1
    const RateSpec r = rate_functions(reg, roots);
    CHECK(r.v2(4) == doctest::Approx(std::exp(4.0)));
    // Log-space keeps huge horizons finite.
    CHECK(r.log_v1(1e4) == doctest::Approx(1e4));
  }
  {
    const auto [reg, roots] = setup(0.5, -4.0625);
    CHECK(rate_functions(reg, roots).v1(2) == doctest::Approx(std::exp(0.5)));
  }
  {
    const auto [reg, roots] = setup(-2, 0);
    const RateSpec r = rate_functions(reg, roots);
    CHECK(r.v1(8) == doctest::Approx(4));
    CHECK(r.v2(8) == doctest::Approx(8));
  }
}

TEST_CASE("deterministic rates diverge monotonically") {
  // Exponential rates with q >= 1 so e^{qT}/(qT) already grows at T = 1.
  const std::pair<double, double> cases[] = {
      {-3, -2}, {-1, 2}, {3, -2}, {2, -1}, {4, -4}, {-2, 0},
      {0.5, 0}, {0, 0},  {0, -1}, {0.5, -4.0625}};
  for (auto [t1, t2] : cases) {
    const auto [reg, roots] = setup(t1, t2);
    INFO(to_string(reg.tag));
    const RateSpec r = rate_functions(reg, roots);
    for (double t = 1; t <= 100; t *= 1.25) {
      CHECK(r.log_v1(2 * t) > r.log_v1(t));
      CHECK(r.log_v2(2 * t) > r.log_v2(t));
    }
    CHECK(r.log_v1(1e6) > r.log_v1(1e3));
  }
}

TEST_CASE("rates reject inconsistent regimes and bad horizons") {
  const RootPair ergodic = char_roots(-3.0, -2.0);
  CHECK_THROWS_AS(rate_functions(Regime{RegimeTag::Harmonic, 1e-9}, ergodic), InvalidArgument);
  CHECK_THROWS_AS(scaling_matrix(Regime{RegimeTag::ZeroDouble, 1e-9}, ergodic, 1), InvalidArgument);
  const auto [reg, roots] = setup(-3, -2);
  CHECK_THROWS_AS(rate_functions(reg, roots).v1(0), InvalidArgument);
  CHECK_THROWS_AS(scaling_matrix(reg, roots, -1), InvalidArgument);
}

TEST_CASE("NLRR availability and formulas") {
  const SufficientStats s = fake_stats(4, 9, 1.5, 16);
  for (const Row& row : kTable) {
    INFO(to_string(row.tag));
    const auto [reg, roots] = setup(row.theta1, row.theta2);
    const std::string avail = row.nlrr;
    if (avail == "No") {
      CHECK_THROWS_AS(nlrr_rate(reg, roots, s), NoNlrr);
      continue;
    }
    const NlrrRate r = nlrr_rate(reg, roots, s);
    CHECK(r.r2.has_value() == (avail == "Yes" && !r.matrix_form));
    CHECK(r.matrix_form == (row.tag == RegimeTag::UnstableOscillation));
  }
  {
    const auto [reg, roots] = setup(-3, -2);
    const NlrrRate r = nlrr_rate(reg, roots, s);
    CHECK(r.r1 == doctest::Approx(3));
    CHECK(*r.r2 == doctest::Approx(2));
    CHECK(r.usable);
  }
  {
    const auto [reg, roots] = setup(3, -2);  // p = 2
    const NlrrRate r = nlrr_rate(reg, roots, s);
    CHECK(r.r1 * r.r1 == doctest::Approx(9 - 4 * 1.5 + 4 * 4));
  }
  {
    const auto [reg, roots] = setup(2, -1);
    CHECK(nlrr_rate(reg, roots, s).r1 == doctest::Approx(2.0 / 256));
  }
  {
    const auto [reg, roots] = setup(-2, 0);
    CHECK(nlrr_rate(reg, roots, s).r1 == doctest::Approx(4.0 / 64));
  }
  {
    // OppositeSign with p = 1 on the X == 0 path: zero rate, unusable.
    const auto [reg, roots] = setup(0, 1);
    REQUIRE(reg.tag == RegimeTag::OppositeSign);
    const NlrrRate r = nlrr_rate(reg, roots, fake_stats(0, 0, 0, 5));
    CHECK(r.r1 == 0.0);
    CHECK_FALSE(r.usable);
  }
  for (auto [t1, t2] : {std::pair{0.0, -1.0}, {0.0, 0.0}, {0.5, 0.0}}) {
    const auto [reg, roots] = setup(t1, t2);
    CHECK_THROWS_AS(nlrr_limit(reg, roots, 1.0), NoNlrr);
  }
}

TEST_CASE("scaling matrices") {
  {
    const auto [reg, roots] = setup(-3, -2);
    const Eigen::Matrix2d a = scaling_matrix(reg, roots, 100);
    CHECK(a(0, 0) == doctest::Approx(0.1));
    CHECK(a(1, 1) == doctest::Approx(0.1));
    CHECK(a(0, 1) == 0.0);
  }
  {
    const auto [reg, roots] = setup(3, -2);
    for (double t : {0.5, 3.0, 11.0}) {
      Eigen::Matrix2d want;
      want << 1, 2, 2, 4;
      want *= std::exp(-2 * t);
      CHECK((scaling_matrix(reg, roots, t) - want).norm() <= 1e-15 * want.norm());
    }
  }
  for (double p : {-1.5, 0.0, 0.5, 2.0, 3.25}) {
    const Eigen::Vector2d b(1, p);
    const Eigen::Matrix2d bb = b * b.transpose();
    CHECK((bb * bb - (1 + p * p) * bb).norm() == 0.0);
  }
  {
    const auto [reg, roots] = setup(-2, 0);
    const Eigen::Matrix2d a = scaling_matrix(reg, roots, 4);
    CHECK(a(0, 0) == doctest::Approx(0.25));
    CHECK(a(1, 1) == doctest::Approx(0.5));
  }
  {
    const auto [reg, roots] = setup(2, -1);
    const Eigen::Matrix2d a = scaling_matrix(reg, roots, 2);
    CHECK(a(1, 1) == doctest::Approx(std::exp(-2.0) / 2 * 1));
    CHECK(a(0, 0) == doctest::Approx(std::exp(-2.0) / 2));
  }
  {
    const auto [reg, roots] = setup(0, 0);
    const Eigen::Matrix2d a = scaling_matrix(reg, roots, 10);
    CHECK(a(0, 0) == doctest::Approx(0.01));
    CHECK(a(1, 1) == doctest::Approx(0.1));
  }
  {
    const auto [reg, roots] = setup(0, -1);
    CHECK(scaling_matrix(reg, roots, 5).diagonal().isApprox(Eigen::Vector2d(0.2, 0.2)));
  }
  {
    const auto [reg, roots] = setup(0.5, -4.0625);  // lambda 0.25, nu 2
    const Eigen::Matrix2d a = scaling_matrix(reg, roots, 4);
    CHECK(a(0, 0) == doctest::Approx(2 * std::exp(-1.0)));
    CHECK(a(0, 1) == 0.0);
    CHECK(a(1, 0) == doctest::Approx(0.25 * std::exp(-1.0)));
    CHECK(a(1, 1) == doctest::Approx(-std::exp(-1.0)));
  }
}

TEST_CASE("rotation template") {
  const Eigen::Matrix2d b = rotation_template(3, 4);
  CHECK(b(0, 0) == doctest::Approx(0.12));
  CHECK(b(0, 1) == doctest::Approx(0.16));
  CHECK(b(1, 0) == doctest::Approx(-0.16));
  // Inverse of the unnormalized rotation-scaling [[x, -y], [y, x]]^T.
  Eigen::Matrix2d m;
  m << 3, -4, 4, 3;
  CHECK((b * m).isApprox(Eigen::Matrix2d::Identity()));
  CHECK_THROWS_AS(rotation_template(0, 0), InvalidArgument);
}
