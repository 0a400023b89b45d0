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

#include "car2/limit_laws.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "car2/parallel.hpp"
#include "car2/regime.hpp"
#include "car2/simulator.hpp"

namespace car2 {

BrownianFunctionals functionals_from_increments(const std::vector<double>& dw1,
                                                const std::vector<double>& dw2) {
  const std::size_t n = dw1.size();
  const bool two_bm = !dw2.empty();
  if (n < 2) throw InvalidArgument("brownian_functionals: grid_n >= 2");
  if (two_bm && dw2.size() != n)
    throw InvalidArgument("brownian_functionals: increment lengths differ");
  const double dt = 1.0 / static_cast<double>(n);
  BrownianFunctionals f;
  double w1 = 0, w2 = 0;
  double cum = 0;  // int_0^t w1, trapezoid
  double z1 = 0, z2 = 0, z3 = 0, ito = 0, levy = 0, q11 = 0, s2 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double d1 = dw1[k];
    const double d2 = two_bm ? dw2[k] : 0.0;
    const double n1 = w1 + d1, n2 = w2 + d2;
    const double cum_next = cum + 0.5 * dt * (w1 + n1);
    z1 += 0.5 * dt * (w1 + n1);
    z2 += 0.5 * dt * (w1 * w1 + n1 * n1);
    z3 += 0.5 * dt * (cum * cum + cum_next * cum_next);
    ito += w1 * d1;
    if (two_bm) {
      levy += w1 * d2 - w2 * d1;
      q11 += w1 * d1 + w2 * d2;
      s2 += 0.5 * dt * (w1 * w1 + w2 * w2 + n1 * n1 + n2 * n2);
    }
    w1 = n1;
    w2 = n2;
    cum = cum_next;
  }
  f.w1_end = w1;
  f.z1 = z1;
  f.z2 = z2;
  f.z3 = z3;
  f.ito11 = ito;
  if (two_bm) {
    f.w2_end = w2;
    f.levy = levy;
    f.q11 = q11;
    f.s2 = s2;
  }
  return f;
}

BrownianFunctionals brownian_functionals(std::size_t grid_n, Rng& rng,
                                         bool two_bm) {
  if (grid_n < 2) throw InvalidArgument("brownian_functionals: grid_n >= 2");
  const double sq = std::sqrt(1.0 / static_cast<double>(grid_n));
  std::vector<double> d1(grid_n), d2(two_bm ? grid_n : 0);
  for (std::size_t k = 0; k < grid_n; ++k) {
    d1[k] = sq * rng.normal();
    if (two_bm) d2[k] = sq * rng.normal();
  }
  return functionals_from_increments(d1, d2);
}

BrownianFunctionals brownian_functionals(std::size_t grid_n,
                                         std::uint64_t seed,
                                         std::uint64_t index, bool two_bm) {
  Rng rng(seed, Stream::LimitLaw, index);
  return brownian_functionals(grid_n, rng, two_bm);
}

Eigen::Vector2d oscillation_u_mean(const ModelParams& params, double lambda,
                                   double nu) {
  return {(params.dx0 - params.x0 * lambda) / nu, -params.x0};
}

Eigen::Matrix2d oscillation_u_cov(double lambda, double nu, double sigma) {
  const double r2 = lambda * lambda + nu * nu;
  Eigen::Matrix2d c;
  c << 1.0 / (4 * lambda) + lambda / (4 * r2), nu / (4 * r2),
      nu / (4 * r2), 1.0 / (4 * lambda) - lambda / (4 * r2);
  return c * (sigma * sigma / (nu * nu));
}

Eigen::Matrix2d oscillation_h_cov(double lambda, double nu, double phase) {
  const double r2 = lambda * lambda + nu * nu;
  const double a = lambda * std::cos(phase) + nu * std::sin(phase);
  const double b = lambda * std::sin(phase) - nu * std::cos(phase);
  Eigen::Matrix2d c;
  c << 1.0 / (4 * lambda) + a / (4 * r2), b / (4 * r2),
      b / (4 * r2), 1.0 / (4 * lambda) - a / (4 * r2);
  return c;
}

Eigen::Vector2d oscillation_limit(double lambda, double nu, double sigma,
                                  double phase, const OscillationInputs& in) {
  using cplx = std::complex<double>;
  const cplx kappa(in.u_c, -in.u_s);
  const cplx mu = kappa * cplx(in.h_c, in.h_s);
  const cplx z = kappa * kappa * std::polar(1.0, phase) / (2.0 * cplx(lambda, nu));
  const double a = std::norm(kappa) / (2 * lambda);
  Eigen::Matrix2d k;
  k << a - z.real(), z.imag(), z.imag(), a + z.real();
  Eigen::Matrix2d g;
  g << 1, 0, lambda, nu;
  // (theta2, theta1) ordering inside, flipped on return.
  const Eigen::Vector2d rhs(mu.imag(), mu.real());
  const Eigen::Vector2d v =
      2 * sigma * g.transpose().partialPivLu().solve(k.partialPivLu().solve(rhs));
  return {v(1), v(0)};
}

OscillationInputs oscillation_inputs(const SamplePath& path, double lambda,
                                     double nu) {
  if (!path.dw) throw InvalidArgument("oscillation_inputs: path has no dw");
  const auto& dw = *path.dw;
  const double t_end = path.horizon();
  double sc = 0, ss = 0, hc = 0, hs = 0;
  for (std::size_t i = 0; i < dw.size(); ++i) {
    const double t = path.t[i];
    const double c = std::cos(nu * t), s = std::sin(nu * t);
    const double back = std::exp(-lambda * t);
    const double fwd = std::exp(lambda * (t - t_end));
    sc += back * c * dw[i];
    ss += back * s * dw[i];
    hc += fwd * c * dw[i];
    hs += fwd * s * dw[i];
  }
  const Eigen::Vector2d m = oscillation_u_mean(path.params, lambda, nu);
  OscillationInputs in;
  in.u_c = m(0) + path.sigma / nu * sc;
  in.u_s = m(1) + path.sigma / nu * ss;
  in.h_c = hc;
  in.h_s = hs;
  return in;
}

namespace {

bool needs_functional(RegimeTag t) {
  return t == RegimeTag::LargerRootZero || t == RegimeTag::SmallerRootZero ||
         t == RegimeTag::ZeroDouble || t == RegimeTag::Harmonic;
}

bool needs_sigma(RegimeTag t) {
  return t == RegimeTag::DistinctPositive || t == RegimeTag::PositiveDouble ||
         t == RegimeTag::UnstableOscillation;
}

Eigen::Vector2d correlated_normal(Rng& rng, const Eigen::Vector2d& mean,
                                  const Eigen::Matrix2d& cov) {
  const Eigen::LLT<Eigen::Matrix2d> llt(cov);
  if (llt.info() != Eigen::Success)
    throw Error("limit sampler: covariance is not positive definite");
  const Eigen::Vector2d e(rng.normal(), rng.normal());
  return mean + llt.matrixL() * e;
}

}  // namespace

LimitSample functional_limit(RegimeTag tag, const RootPair& roots,
                             const BrownianFunctionals& f, double eta) {
  LimitSample s;
  s.tag = tag;
  const double t1 = roots.theta1();
  const double w = f.w1_end;
  switch (tag) {
    case RegimeTag::LargerRootZero:
      s.l1 = std::numbers::sqrt2 * std::abs(t1) * eta;
      s.l2 = std::abs(t1) * (w * w - 1) / (2 * f.z2);
      break;
    case RegimeTag::SmallerRootZero:
      s.l1 = t1 * (w * w - 1) / (2 * f.z2);
      s.l2 = -s.l1;
      break;
    case RegimeTag::ZeroDouble: {
      const double den = 4 * f.z2 * f.z3 - std::pow(f.z1, 4);
      s.l1 = (2 * f.z3 * (w * w - 1) - 2 * f.z1 * f.z1 * (w * f.z1 - f.z2)) / den;
      s.l2 = (4 * f.z2 * (w * f.z1 - f.z2) - f.z1 * f.z1 * (w * w - 1)) / den;
      break;
    }
    case RegimeTag::Harmonic:
      // int V dV ~ (|w|^2 - 2) sigma^2 T / 4, so l1 grows with |w|.
      s.l1 = (w * w + f.w2_end * f.w2_end - 2) / f.s2;
      s.l2 = 2 * roots.im_p * f.levy / f.s2;
      break;
    default:
      throw InvalidArgument("functional_limit: regime " + std::string(to_string(tag)) +
                            " has no Brownian-functional limit");
  }
  return s;
}

LimitSample sample_limit_one(const Regime& regime, const RootPair& roots,
                             const ModelParams& params,
                             const LimitOptions& opts, std::uint64_t seed,
                             std::uint64_t index) {
  check_consistent(regime, roots);
  const RegimeTag tag = regime.tag;
  if (needs_functional(tag) && opts.grid_n < kMinFunctionalGrid)
    throw InvalidArgument("limit sampler: grid_n must be >= 1000");
  if (needs_sigma(tag) && !(params.sigma > 0))
    throw InvalidArgument("limit sampler: sigma must be > 0 in regime " +
                          std::string(to_string(tag)));

  Rng rng(seed, Stream::LimitLaw, index);
  LimitSample s;
  s.tag = tag;
  const double p = roots.re_p, q = roots.re_q;
  const double t1 = roots.theta1(), t2 = roots.theta2();
  switch (tag) {
    case RegimeTag::Ergodic: {
      const double e1 = rng.normal(), e2 = rng.normal();
      s.l1 = std::numbers::sqrt2 * std::abs(t1) * e1;
      s.l2 = std::sqrt(2 * std::abs(t2)) * std::abs(t1) * e2;
      break;
    }
    case RegimeTag::OppositeSign:
      s.l1 = std::numbers::sqrt2 * std::abs(q) * rng.normal();
      s.l2 = -p * s.l1;
      break;
    case RegimeTag::DistinctPositive: {
      const double c = std::sqrt(2 * q) * (params.dx0 - p * params.x0) / params.sigma;
      const double eta = rng.normal(), xi = rng.normal();
      s.l1 = 2 * (p + q) * q / (p - q) * eta / (xi + c);
      s.l2 = -p * s.l1;
      break;
    }
    case RegimeTag::PositiveDouble: {
      const double m = 0.5 * (p + q);
      const double c = std::sqrt(2 * m) * (params.dx0 - m * params.x0) / params.sigma;
      const double eta = rng.normal(), xi = rng.normal();
      s.l1 = 4 * std::numbers::sqrt2 * m * eta / (xi + c);
      s.l2 = -m * s.l1;
      break;
    }
    case RegimeTag::LargerRootZero: {
      const double eta = rng.normal();
      const BrownianFunctionals f = brownian_functionals(opts.grid_n, rng, false);
      s = functional_limit(tag, roots, f, eta);
      break;
    }
    case RegimeTag::SmallerRootZero:
    case RegimeTag::ZeroDouble:
    case RegimeTag::Harmonic: {
      const bool two = tag == RegimeTag::Harmonic;
      s = functional_limit(tag, roots, brownian_functionals(opts.grid_n, rng, two), 0.0);
      break;
    }
    case RegimeTag::UnstableOscillation: {
      if (!opts.phase)
        throw InvalidArgument("limit sampler: UnstableOscillation needs a phase");
      const double lam = p, nu = roots.im_p;
      const Eigen::Vector2d u =
          correlated_normal(rng, oscillation_u_mean(params, lam, nu),
                            oscillation_u_cov(lam, nu, params.sigma));
      const Eigen::Vector2d hh = correlated_normal(
          rng, Eigen::Vector2d::Zero(), oscillation_h_cov(lam, nu, *opts.phase));
      const Eigen::Vector2d l =
          oscillation_limit(lam, nu, params.sigma, *opts.phase,
                            {u(0), u(1), hh(0), hh(1)});
      s.l1 = l(0);
      s.l2 = l(1);
      break;
    }
  }
  s.grid_n = needs_functional(tag) ? opts.grid_n : 0;
  return s;
}

std::vector<LimitSample> sample_limit(const Regime& regime,
                                      const RootPair& roots,
                                      const ModelParams& params, std::size_t n,
                                      const LimitOptions& opts,
                                      std::uint64_t seed, unsigned threads) {
  if (n < 1) throw InvalidArgument("limit sampler: n must be >= 1");
  std::vector<LimitSample> out(n);
  parallel_for(n, threads, [&](std::size_t i) {
    out[i] = sample_limit_one(regime, roots, params, opts, seed, i);
  });
  return out;
}

}  // namespace car2
