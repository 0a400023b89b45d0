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

#ifndef CAR2_MODEL_HPP
#define CAR2_MODEL_HPP

// Parameter algebra for dX = V dt, dV = (theta2 X + theta1 V) dt + sigma dW.
// Everything here is templated on the scalar so the same code can be run in
// long double as a cross-check.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <string_view>

#include "car2/errors.hpp"

namespace car2 {

template <typename Scalar>
struct ModelParamsT {
  Scalar theta1{0};
  Scalar theta2{0};
  Scalar sigma{1};
  Scalar x0{0};
  Scalar dx0{0};

  template <typename Other>
  ModelParamsT<Other> cast() const {
    return {Other(theta1), Other(theta2), Other(sigma), Other(x0), Other(dx0)};
  }
};
using ModelParams = ModelParamsT<double>;

// Coefficient vector in the (theta2, theta1) order used by the likelihood.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> theta_vector(const ModelParamsT<Scalar>& p) {
  return {p.theta2, p.theta1};
}

template <typename Scalar>
void validate(const ModelParamsT<Scalar>& p) {
  using std::isfinite;
  if (!isfinite(p.theta1) || !isfinite(p.theta2) || !isfinite(p.sigma) ||
      !isfinite(p.x0) || !isfinite(p.dx0))
    throw InvalidArgument("model parameters must be finite");
  if (p.sigma < 0) throw InvalidArgument("sigma must be non-negative");
}

// p has the larger real part; a complex pair keeps im_p > 0.
template <typename Scalar>
struct RootPairT {
  Scalar re_p{0};
  Scalar im_p{0};
  Scalar re_q{0};
  Scalar im_q{0};

  bool is_complex() const { return im_p != Scalar(0); }
  std::complex<Scalar> p() const { return {re_p, im_p}; }
  std::complex<Scalar> q() const { return {re_q, im_q}; }
  Scalar theta1() const { return re_p + re_q; }
  Scalar theta2() const { return -(re_p * re_q - im_p * im_q); }
};
using RootPair = RootPairT<double>;

template <typename Scalar>
RootPairT<Scalar> char_roots(Scalar theta1, Scalar theta2) {
  using std::sqrt;
  RootPairT<Scalar> r;
  const Scalar disc = theta1 * theta1 + Scalar(4) * theta2;
  if (disc < 0) {
    r.re_p = r.re_q = theta1 / Scalar(2);
    r.im_p = sqrt(-disc) / Scalar(2);
    r.im_q = -r.im_p;
    return r;
  }
  // Larger-magnitude root without cancellation, the other from p*q = -theta2.
  const Scalar s = sqrt(disc);
  const Scalar big = theta1 >= 0 ? (theta1 + s) / Scalar(2)
                                 : (theta1 - s) / Scalar(2);
  const Scalar small = big != Scalar(0) ? -theta2 / big : Scalar(0);
  r.re_p = big > small ? big : small;
  r.re_q = big > small ? small : big;
  return r;
}

template <typename Scalar>
RootPairT<Scalar> char_roots(const ModelParamsT<Scalar>& p) {
  return char_roots(p.theta1, p.theta2);
}

enum class RegimeTag {
  Ergodic,
  OppositeSign,
  DistinctPositive,
  PositiveDouble,
  LargerRootZero,
  SmallerRootZero,
  ZeroDouble,
  Harmonic,
  UnstableOscillation,
};

inline constexpr std::array<RegimeTag, 9> kAllRegimes = {
    RegimeTag::Ergodic,          RegimeTag::OppositeSign,
    RegimeTag::DistinctPositive, RegimeTag::PositiveDouble,
    RegimeTag::LargerRootZero,   RegimeTag::SmallerRootZero,
    RegimeTag::ZeroDouble,       RegimeTag::Harmonic,
    RegimeTag::UnstableOscillation};

std::string_view to_string(RegimeTag tag);
RegimeTag parse_regime(std::string_view name);

struct Regime {
  RegimeTag tag{RegimeTag::Ergodic};
  double classified_with_tol{0};
};

template <typename Scalar>
Scalar default_tolerance(Scalar theta1, Scalar theta2) {
  using std::abs;
  return Scalar(1e-9) * (Scalar(1) + abs(theta1) + abs(theta2));
}

template <typename Scalar>
Regime classify(const RootPairT<Scalar>& roots, Scalar tol) {
  using std::abs;
  if (!(tol >= 0)) throw InvalidArgument("classification tolerance must be >= 0");
  auto snap = [tol](Scalar v) { return abs(v) <= tol ? Scalar(0) : v; };
  const Scalar rp = snap(roots.re_p), ip = snap(roots.im_p);
  const Scalar rq = snap(roots.re_q), iq = snap(roots.im_q);
  const Scalar gap = abs(std::complex<Scalar>(rp - rq, ip - iq));
  const Scalar scale = Scalar(1) + abs(std::complex<Scalar>(rp, ip)) +
                       abs(std::complex<Scalar>(rq, iq));
  const bool is_double = gap <= tol * scale;

  Regime out;
  out.classified_with_tol = static_cast<double>(tol);
  if (is_double) {
    const Scalar m = snap((rp + rq) / Scalar(2));
    out.tag = m < 0   ? RegimeTag::Ergodic
              : m > 0 ? RegimeTag::PositiveDouble
                      : RegimeTag::ZeroDouble;
  } else if (ip != Scalar(0)) {
    out.tag = rp < 0   ? RegimeTag::Ergodic
              : rp > 0 ? RegimeTag::UnstableOscillation
                       : RegimeTag::Harmonic;
  } else if (rp < 0) {
    out.tag = RegimeTag::Ergodic;
  } else if (rp == 0) {
    out.tag = RegimeTag::LargerRootZero;
  } else {
    out.tag = rq < 0   ? RegimeTag::OppositeSign
              : rq > 0 ? RegimeTag::DistinctPositive
                       : RegimeTag::SmallerRootZero;
  }
  return out;
}

template <typename Scalar>
Regime classify(const ModelParamsT<Scalar>& p) {
  return classify(char_roots(p), default_tolerance(p.theta1, p.theta2));
}

template <typename Scalar>
struct FundamentalValuesT {
  Scalar x1{1};
  Scalar x2{0};
  Scalar dx1{0};
  Scalar dx2{1};

  Eigen::Matrix<Scalar, 2, 2> mean_matrix() const {
    Eigen::Matrix<Scalar, 2, 2> m;
    m << x1, x2, dx1, dx2;
    return m;
  }
};
using FundamentalValues = FundamentalValuesT<double>;

// Auto picks the series form when |p-q| max(t,1) < 1e-6. The forced modes
// exist so the two real branches can be compared against each other.
enum class Branch { Auto, Distinct, DoubleLimit };

template <typename Scalar>
FundamentalValuesT<Scalar> fundamental_solutions(const RootPairT<Scalar>& r,
                                                 Scalar t,
                                                 Branch branch = Branch::Auto) {
  using std::cos;
  using std::cosh;
  using std::exp;
  using std::isfinite;
  using std::sin;
  using std::sinh;
  if (!(t >= 0) || !isfinite(t))
    throw InvalidArgument("fundamental_solutions: t must be finite and >= 0");

  const Scalar theta2 = r.theta2();
  FundamentalValuesT<Scalar> f;
  if (t == Scalar(0)) return f;

  if (r.im_p != Scalar(0)) {
    const Scalar lam = r.re_p, nu = r.im_p;
    const Scalar e = exp(lam * t);
    const Scalar s = sin(nu * t) / nu;
    const Scalar c = cos(nu * t);
    f.x1 = e * (c - lam * s);
    f.x2 = e * s;
    f.dx2 = e * (lam * s + c);
    f.dx1 = theta2 * f.x2;
    return f;
  }

  const Scalar p = r.re_p, q = r.re_q;
  const Scalar m = (p + q) / Scalar(2);
  const Scalar d = (p - q) / Scalar(2);
  const Scalar dt = d * t;
  const bool series = branch == Branch::DoubleLimit ||
                      (branch == Branch::Auto &&
                       (p - q) * (t > Scalar(1) ? t : Scalar(1)) < Scalar(1e-6));
  if (series) {
    const Scalar e = exp(m * t);
    const Scalar s = t * (Scalar(1) + dt * dt / Scalar(6));
    const Scalar c = Scalar(1) + dt * dt / Scalar(2);
    f.x1 = e * (c - m * s);
    f.x2 = e * s;
    f.dx2 = e * (c + m * s);
  } else if (dt <= Scalar(20)) {
    const Scalar e = exp(m * t);
    const Scalar s = sinh(dt) / d;
    const Scalar c = cosh(dt);
    const Scalar em = exp(-dt);
    // cosh - m sinh/d loses everything when m ~ d; these forms do not.
    f.x1 = m > 0 ? e * (em - q * s) : e * (c - m * s);
    f.x2 = e * s;
    f.dx2 = m > 0 ? e * (c + m * s) : e * (em + p * s);
  } else {
    const Scalar ep = exp(p * t), eq = exp(q * t);
    const Scalar w = p - q;
    f.x1 = (p * eq - q * ep) / w;
    f.x2 = (ep - eq) / w;
    f.dx2 = (p * ep - q * eq) / w;
  }
  f.dx1 = theta2 * f.x2;
  return f;
}

template <typename Scalar>
struct TransitionKernelT {
  Eigen::Matrix<Scalar, 2, 2> mean_matrix;
  // Joint covariance of (dW, sigma int x2 dW, sigma int dx2 dW) over one step.
  Eigen::Matrix<Scalar, 3, 3> cov_matrix;
};
using TransitionKernel = TransitionKernelT<double>;

namespace detail {

// Covariance over a short step s from the exponential series of the
// augmented generator [[0,0,0],[0,0,1],[0,theta2,theta1]] acting on
// (1, 0, sigma). Needs |A| s <= 1/4 so that 40 terms are plenty.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> short_step_cov(Scalar theta1, Scalar theta2,
                                           Scalar sigma, Scalar s) {
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
  constexpr int kTerms = 40;
  std::array<Vec3, kTerms> g;
  g[0] = Vec3(Scalar(1), Scalar(0), sigma);
  for (int j = 1; j < kTerms; ++j) {
    const Vec3& a = g[j - 1];
    g[j] = Vec3(Scalar(0), a(2), theta2 * a(1) + theta1 * a(2)) * (s / Scalar(j));
  }
  Eigen::Matrix<Scalar, 3, 3> q = Eigen::Matrix<Scalar, 3, 3>::Zero();
  for (int j = kTerms - 1; j >= 0; --j)
    for (int k = kTerms - 1; k >= 0; --k)
      q.noalias() += g[j] * g[k].transpose() / Scalar(j + k + 1);
  return q * s;
}

}  // namespace detail

// Exact one-step kernel. Mean from the closed forms; covariance by a short
// step series followed by repeated doubling C(2s) = C(s) + F C(s) F^T with
// F = blockdiag(1, M(s)).
template <typename Scalar>
TransitionKernelT<Scalar> transition(const ModelParamsT<Scalar>& params,
                                     Scalar h) {
  using std::abs;
  using std::isfinite;
  validate(params);
  if (!(h > 0) || !isfinite(h))
    throw InvalidArgument("transition: h must be finite and > 0");

  const RootPairT<Scalar> roots = char_roots(params);
  TransitionKernelT<Scalar> k;
  k.mean_matrix = fundamental_solutions(roots, h).mean_matrix();

  const Scalar norm = Scalar(1) + abs(params.theta1) + abs(params.theta2);
  Scalar s = h;
  int levels = 0;
  while (s * norm > Scalar(0.25)) {
    s /= Scalar(2);
    ++levels;
  }
  Eigen::Matrix<Scalar, 3, 3> c =
      detail::short_step_cov(params.theta1, params.theta2, params.sigma, s);
  for (int i = 0; i < levels; ++i) {
    Eigen::Matrix<Scalar, 3, 3> f = Eigen::Matrix<Scalar, 3, 3>::Zero();
    f(0, 0) = Scalar(1);
    f.template bottomRightCorner<2, 2>() =
        fundamental_solutions(roots, s).mean_matrix();
    c += f * c * f.transpose();
    s *= Scalar(2);
  }
  c = ((c + c.transpose()) / Scalar(2)).eval();
  c(0, 0) = h;
  k.cov_matrix = c;
  return k;
}

}  // namespace car2

#endif  // CAR2_MODEL_HPP
