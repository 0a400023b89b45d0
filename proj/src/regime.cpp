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

#include "car2/regime.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace car2 {

std::string_view to_string(NlrrAvailability a) {
  switch (a) {
    case NlrrAvailability::Yes: return "Yes";
    case NlrrAvailability::No: return "No";
    case NlrrAvailability::Theta1Only: return "theta1-only";
  }
  return "Unknown";
}

void check_consistent(const Regime& regime, const RootPair& roots) {
  const Regime again = classify(roots, regime.classified_with_tol);
  if (again.tag != regime.tag)
    throw InvalidArgument("regime " + std::string(to_string(regime.tag)) +
                          " does not match roots (classified as " +
                          std::string(to_string(again.tag)) + ")");
}

namespace {

double log_t(double t) {
  if (!(t > 0)) throw InvalidArgument("rates: T must be > 0");
  return std::log(t);
}

}  // namespace

RateSpec rate_functions(const Regime& regime, const RootPair& roots) {
  check_consistent(regime, roots);
  RateSpec r;
  r.tag = regime.tag;
  const double p = roots.re_p, q = roots.re_q;
  const double abs_t1 = std::abs(roots.theta1());
  auto set = [&r](auto f1, auto f2, std::string e1, std::string e2) {
    r.log_v1 = f1;
    r.log_v2 = f2;
    r.v1_expr = std::move(e1);
    r.v2_expr = std::move(e2);
  };
  switch (regime.tag) {
    case RegimeTag::Ergodic: {
      auto f = [abs_t1](double t) { return 0.5 * (log_t(t) + std::log(abs_t1)); };
      set(f, f, "sqrt(T*|theta1|)", "sqrt(T*|theta1|)");
      r.ld1 = r.ld2 = "Normal";
      r.nlrr = NlrrAvailability::Yes;
      r.llr_label = "LAN";
      break;
    }
    case RegimeTag::OppositeSign: {
      auto f = [q](double t) { return 0.5 * (log_t(t) + std::log(-q)); };
      set(f, f, "sqrt(|q|*T)", "sqrt(|q|*T)");
      r.ld1 = r.ld2 = "Normal";
      r.nlrr = NlrrAvailability::Yes;
      r.llr_label = "DLAMN";
      break;
    }
    case RegimeTag::DistinctPositive: {
      auto f = [q](double t) { log_t(t); return q * t; };
      set(f, f, "exp(q*T)", "exp(q*T)");
      r.ld1 = r.ld2 = "Cauchy-type";
      r.nlrr = NlrrAvailability::Yes;
      r.llr_label = "DLAMN";
      break;
    }
    case RegimeTag::PositiveDouble: {
      // Use the mean of the (numerically equal) roots.
      const double m = 0.5 * (p + q);
      auto f = [m](double t) { return m * t - std::log(m * t); };
      set(f, f, "exp(q*T)/(q*T)", "exp(q*T)/(q*T)");
      r.ld1 = r.ld2 = "Cauchy-type";
      r.nlrr = NlrrAvailability::Yes;
      r.llr_label = "DLAMN";
      break;
    }
    case RegimeTag::LargerRootZero: {
      auto f1 = [q](double t) { return 0.5 * (log_t(t) + std::log(-q)); };
      auto f2 = [](double t) { return log_t(t); };
      set(f1, f2, "sqrt(|theta1|*T)", "T");
      r.ld1 = "Normal";
      r.ld2 = "F1(w)";
      r.nlrr = NlrrAvailability::Theta1Only;
      r.llr_label = "LABF/LAN";
      break;
    }
    case RegimeTag::SmallerRootZero: {
      auto f1 = [abs_t1](double t) { return log_t(t) + std::log(abs_t1); };
      auto f2 = [](double t) { return log_t(t); };
      set(f1, f2, "theta1*T", "T");
      r.ld1 = r.ld2 = "F1(w)";
      r.nlrr = NlrrAvailability::No;
      r.llr_label = "DLAMN";
      break;
    }
    case RegimeTag::ZeroDouble: {
      auto f1 = [](double t) { return log_t(t); };
      auto f2 = [](double t) { return 2.0 * log_t(t); };
      set(f1, f2, "T", "T^2");
      r.ld1 = r.ld2 = "F1(w)";
      r.nlrr = NlrrAvailability::No;
      r.llr_label = "LABF";
      break;
    }
    case RegimeTag::Harmonic: {
      auto f = [](double t) { return log_t(t); };
      set(f, f, "T", "T");
      r.ld1 = r.ld2 = "F2(w)";
      r.nlrr = NlrrAvailability::No;
      r.llr_label = "LABF";
      break;
    }
    case RegimeTag::UnstableOscillation: {
      auto f = [lam = p](double t) { log_t(t); return lam * t; };
      set(f, f, "exp(lambda*T)", "exp(lambda*T)");
      r.ld1 = r.ld2 = "Many";
      r.nlrr = NlrrAvailability::Yes;
      r.llr_label = "LAMN-family";
      break;
    }
  }
  return r;
}

NlrrRate nlrr_rate(const Regime& regime, const RootPair& roots,
                   const SufficientStats& s) {
  check_consistent(regime, roots);
  NlrrRate out;
  const double p = roots.re_p;
  const double t = s.horizon;
  switch (regime.tag) {
    case RegimeTag::Ergodic:
      out.r1 = std::sqrt(std::max(s.svv, 0.0));
      out.r2 = std::sqrt(std::max(s.sxx, 0.0));
      break;
    case RegimeTag::DistinctPositive:
    case RegimeTag::OppositeSign: {
      // int (V - p X)^2 dt expanded in the stored statistics.
      const double r2 = s.svv - 2.0 * p * s.sxv + p * p * s.sxx;
      out.r1 = std::sqrt(std::max(r2, 0.0));
      out.r2 = out.r1;
      break;
    }
    case RegimeTag::PositiveDouble:
      out.r1 = std::sqrt(std::max(s.sxx, 0.0)) / (t * t);
      out.r2 = out.r1;
      break;
    case RegimeTag::LargerRootZero:
      out.r1 = s.sxx / std::pow(t, 1.5);
      break;
    case RegimeTag::UnstableOscillation:
      out.r1 = std::numeric_limits<double>::quiet_NaN();
      out.matrix_form = true;
      return out;
    case RegimeTag::Harmonic:
    case RegimeTag::ZeroDouble:
    case RegimeTag::SmallerRootZero:
      throw NoNlrr("no normal limit with a random rate in regime " +
                   std::string(to_string(regime.tag)));
  }
  auto good = [](double v) { return std::isfinite(v) && v > 0; };
  out.usable = good(out.r1) && (!out.r2 || good(*out.r2));
  return out;
}

NlrrLimit nlrr_limit(const Regime& regime, const RootPair& roots,
                     double sigma) {
  check_consistent(regime, roots);
  const double p = roots.re_p, q = roots.re_q;
  NlrrLimit l;
  switch (regime.tag) {
    case RegimeTag::Ergodic:
      l.scale1 = sigma;
      l.scale2 = sigma;
      break;
    case RegimeTag::DistinctPositive:
      l.scale1 = (p + q) / (p - q) * sigma;
      l.coupling = -p;
      break;
    case RegimeTag::PositiveDouble:
      l.scale1 = 2.0 * std::numbers::sqrt2 * p * sigma;
      l.coupling = -p;
      break;
    case RegimeTag::OppositeSign:
      l.scale1 = sigma;
      l.coupling = -p;
      break;
    case RegimeTag::LargerRootZero:
      l.scale1 = sigma * sigma / (std::numbers::sqrt2 * std::pow(-q, 1.5));
      break;
    default:
      throw NoNlrr("no scalar normal limit in regime " +
                   std::string(to_string(regime.tag)));
  }
  return l;
}

Eigen::Matrix2d scaling_matrix(const Regime& regime, const RootPair& roots,
                               double t) {
  check_consistent(regime, roots);
  if (!(t > 0)) throw InvalidArgument("scaling_matrix: T must be > 0");
  const double p = roots.re_p;
  const Eigen::Vector2d b(1.0, p);
  switch (regime.tag) {
    case RegimeTag::Ergodic:
      return Eigen::Vector2d::Constant(1.0 / std::sqrt(t)).asDiagonal();
    case RegimeTag::OppositeSign:
    case RegimeTag::DistinctPositive:
    case RegimeTag::SmallerRootZero:
      return std::exp(-p * t) * b * b.transpose();
    case RegimeTag::LargerRootZero:
      return Eigen::Vector2d(1.0 / t, 1.0 / std::sqrt(t)).asDiagonal();
    case RegimeTag::PositiveDouble:
      return std::exp(-p * t) / t * b * b.transpose();
    case RegimeTag::ZeroDouble:
      return Eigen::Vector2d(1.0 / (t * t), 1.0 / t).asDiagonal();
    case RegimeTag::Harmonic:
      return Eigen::Vector2d::Constant(1.0 / t).asDiagonal();
    case RegimeTag::UnstableOscillation: {
      Eigen::Matrix2d a;
      a << roots.im_p, 0.0, p, -1.0;
      return a * std::exp(-p * t);
    }
  }
  return Eigen::Matrix2d::Zero();
}

Eigen::Matrix2d rotation_template(double x, double y) {
  const double r2 = x * x + y * y;
  if (!(r2 > 0)) throw InvalidArgument("rotation_template: zero vector");
  Eigen::Matrix2d b;
  b << x, y, -y, x;
  return b / r2;
}

}  // namespace car2
