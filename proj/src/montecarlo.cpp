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

#include "car2/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "car2/estimator.hpp"
#include "car2/parallel.hpp"
#include "car2/regime.hpp"
#include "car2/simulator.hpp"

namespace car2 {

std::string_view to_string(Normalization n) {
  switch (n) {
    case Normalization::DeterministicRate: return "deterministic_rate";
    case Normalization::Nlrr: return "nlrr";
    case Normalization::MatrixAT: return "matrix_A_T";
  }
  return "unknown";
}

std::string_view to_string(ComparisonKind k) {
  switch (k) {
    case ComparisonKind::VsLimitSampler: return "vs_limit_sampler";
    case ComparisonKind::VsNormal: return "vs_normal";
  }
  return "unknown";
}

Normalization parse_normalization(std::string_view s) {
  for (auto n : {Normalization::DeterministicRate, Normalization::Nlrr,
                 Normalization::MatrixAT})
    if (to_string(n) == s) return n;
  throw InvalidArgument("unknown normalization: " + std::string(s));
}

ComparisonKind parse_comparison(std::string_view s) {
  for (auto k : {ComparisonKind::VsLimitSampler, ComparisonKind::VsNormal})
    if (to_string(k) == s) return k;
  throw InvalidArgument("unknown comparison: " + std::string(s));
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  auto bad = [](double v) { return std::isnan(v); };
  if (std::any_of(x.begin(), x.end(), bad) || std::any_of(y.begin(), y.end(), bad))
    throw InvalidArgument("ks_two_sample: NaN in sample");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

double quantile(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw InvalidArgument("quantile: empty sample");
  if (!(level >= 0 && level <= 1)) throw InvalidArgument("quantile: level outside [0,1]");
  const double h = static_cast<double>(sorted.size() - 1) * level;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

std::array<double, 9> quantiles(std::span<const double> values) {
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  std::array<double, 9> q{};
  for (std::size_t k = 0; k < q.size(); ++k) q[k] = quantile(s, kQuantileLevels[k]);
  return q;
}

double max_horizon(const RootPair& roots) {
  const double growth = roots.re_p;
  if (growth <= 0) return std::numeric_limits<double>::infinity();
  return std::log(1e250) / growth;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Status { Ok, Singular, Overflow };

struct Rep {
  Status status = Status::Ok;
  std::array<double, 2> diff{kNaN, kNaN};  // theta_hat - theta, theta1 first
  std::array<double, 2> norm{kNaN, kNaN};
};

double scale_by_log(double d, double log_rate) {
  if (d == 0) return 0.0;
  return std::copysign(std::exp(std::log(std::abs(d)) + log_rate), d);
}

struct Context {
  const ExperimentConfig& cfg;
  Regime regime;
  RootPair roots;
  RateSpec rates;
};

bool matrix_mode(const Context& ctx, Normalization n) {
  return n == Normalization::MatrixAT ||
         (n == Normalization::Nlrr &&
          ctx.regime.tag == RegimeTag::UnstableOscillation);
}

Rep run_rep(const Context& ctx, double horizon, std::size_t n_steps,
            std::uint64_t index, Normalization norm) {
  const ExperimentConfig& cfg = ctx.cfg;
  const bool oscillating = ctx.regime.tag == RegimeTag::UnstableOscillation;
  SimConfig sc;
  sc.horizon = horizon;
  sc.n_steps = n_steps;
  sc.scheme = Scheme::Exact;
  sc.record_noise = matrix_mode(ctx, norm) && oscillating;
  sc.seed = cfg.seed;
  sc.replication_index = index;

  Rep rep;
  try {
    const SamplePath path = simulate(cfg.params, sc);
    const SufficientStats st = sufficient_stats(path);
    const Estimate e = mle(st);
    rep.diff = {e.theta1_hat - cfg.params.theta1, e.theta2_hat - cfg.params.theta2};
    if (!std::isfinite(rep.diff[0]) || !std::isfinite(rep.diff[1])) {
      rep.status = Status::Overflow;
      return rep;
    }
    if (matrix_mode(ctx, norm)) {
      const Eigen::Vector2d d(rep.diff[1], rep.diff[0]);
      Eigen::Vector2d v = scaling_matrix(ctx.regime, ctx.roots, horizon) * (st.psi() * d);
      if (oscillating) {
        const OscillationInputs in =
            oscillation_inputs(path, ctx.roots.re_p, ctx.roots.im_p);
        v = rotation_template(in.u_s, in.u_c) * v;
      }
      rep.norm = {v(0), v(1)};
    } else if (norm == Normalization::Nlrr) {
      const NlrrRate r = nlrr_rate(ctx.regime, ctx.roots, st);
      if (!r.usable) {
        rep.status = Status::Singular;
        return rep;
      }
      rep.norm[0] = r.r1 * rep.diff[0];
      if (r.r2) rep.norm[1] = *r.r2 * rep.diff[1];
    } else {
      rep.norm = {scale_by_log(rep.diff[0], ctx.rates.log_v1(horizon)),
                  scale_by_log(rep.diff[1], ctx.rates.log_v2(horizon))};
    }
  } catch (const SingularDesign&) {
    rep.status = Status::Singular;
  } catch (const NumericOverflow&) {
    rep.status = Status::Overflow;
  }
  return rep;
}

double oscillation_phase(const RootPair& roots, double horizon) {
  const double two_pi = 2 * std::numbers::pi;
  double ph = std::fmod(2 * roots.im_p * horizon, two_pi);
  if (ph < 0) ph += two_pi;
  return ph;
}

std::array<double, 2> reference_draw(const Context& ctx, double horizon,
                                     std::uint64_t index) {
  const ExperimentConfig& cfg = ctx.cfg;
  if (cfg.comparison.kind == ComparisonKind::VsNormal) {
    Rng rng(cfg.seed, Stream::Reference, index);
    const double a = rng.normal(), b = rng.normal();
    return {cfg.comparison.mean[0] + std::sqrt(cfg.comparison.variance[0]) * a,
            cfg.comparison.mean[1] + std::sqrt(cfg.comparison.variance[1]) * b};
  }
  const double phase = oscillation_phase(ctx.roots, horizon);
  if (matrix_mode(ctx, cfg.normalization)) {
    // Only the oscillating case has a sampler here: -sigma nu (h_c, h_s).
    const double lam = ctx.roots.re_p, nu = ctx.roots.im_p;
    const Eigen::LLT<Eigen::Matrix2d> llt(oscillation_h_cov(lam, nu, phase));
    Rng rng(cfg.seed, Stream::LimitLaw, index);
    const Eigen::Vector2d e(rng.normal(), rng.normal());
    const Eigen::Vector2d h = llt.matrixL() * e;
    const double k = -cfg.params.sigma * nu;
    return {k * h(0), k * h(1)};
  }
  if (cfg.normalization == Normalization::Nlrr) {
    const NlrrLimit lim = nlrr_limit(ctx.regime, ctx.roots, cfg.params.sigma);
    Rng rng(cfg.seed, Stream::LimitLaw, index);
    const double a = rng.normal(), b = rng.normal();
    const double c1 = lim.scale1 * a;
    double c2 = kNaN;
    if (lim.coupling) c2 = *lim.coupling * c1;
    else if (lim.scale2) c2 = *lim.scale2 * b;
    return {c1, c2};
  }
  LimitOptions opts;
  opts.grid_n = cfg.grid_n;
  if (ctx.regime.tag == RegimeTag::UnstableOscillation) opts.phase = phase;
  const LimitSample s = sample_limit_one(ctx.regime, ctx.roots, cfg.params,
                                         opts, cfg.seed, index);
  return {s.l1, s.l2};
}

void validate_config(const ExperimentConfig& cfg, const Context& ctx) {
  validate(cfg.params);
  if (cfg.n_reps < 2) throw InvalidArgument("experiment: n_reps must be >= 2");
  if (cfg.horizons.empty()) throw InvalidArgument("experiment: no horizons");
  if (cfg.n_steps_per_unit_time < 1)
    throw InvalidArgument("experiment: n_steps_per_unit_time must be >= 1");
  double prev = 0;
  for (double t : cfg.horizons) {
    if (!(t > prev) || !std::isfinite(t))
      throw InvalidArgument("experiment: horizons must be positive and increasing");
    prev = t;
  }
  if (cfg.horizons.back() >= max_horizon(ctx.roots))
    throw InvalidArgument("experiment: horizon exceeds the e^{pT} < 1e250 cap");
  const RegimeTag tag = ctx.regime.tag;
  const bool no_nlrr = tag == RegimeTag::Harmonic || tag == RegimeTag::ZeroDouble ||
                       tag == RegimeTag::SmallerRootZero;
  if (cfg.normalization == Normalization::Nlrr && no_nlrr)
    throw InvalidArgument("experiment: nlrr normalization does not exist for " +
                          std::string(to_string(tag)));
  if (cfg.normalization == Normalization::MatrixAT &&
      cfg.comparison.kind == ComparisonKind::VsLimitSampler &&
      tag != RegimeTag::UnstableOscillation)
    throw InvalidArgument(
        "experiment: matrix_A_T has a limit sampler only for UnstableOscillation");
  if (cfg.comparison.kind == ComparisonKind::VsNormal)
    for (double v : cfg.comparison.variance)
      if (!(v >= 0)) throw InvalidArgument("experiment: variance must be >= 0");
}

std::size_t steps_for(const ExperimentConfig& cfg, double horizon) {
  const double n = std::round(horizon * static_cast<double>(cfg.n_steps_per_unit_time));
  return std::max<std::size_t>(2, static_cast<std::size_t>(n));
}

std::optional<CoordinateSummary> summarize(const std::vector<double>& v,
                                           const std::vector<double>& ref) {
  if (v.empty() || ref.empty()) return std::nullopt;
  CoordinateSummary s;
  s.quantiles = quantiles(v);
  s.reference_quantiles = quantiles(ref);
  s.ks = ks_two_sample(v, ref);
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  s.mean = m;
  s.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return s;
}

double pearson(const std::vector<std::array<double, 2>>& pts) {
  double mx = 0, my = 0;
  std::size_t n = 0;
  for (const auto& p : pts)
    if (std::isfinite(p[0]) && std::isfinite(p[1])) {
      mx += p[0];
      my += p[1];
      ++n;
    }
  if (n < 2) return kNaN;
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (const auto& p : pts)
    if (std::isfinite(p[0]) && std::isfinite(p[1])) {
      sxy += (p[0] - mx) * (p[1] - my);
      sxx += (p[0] - mx) * (p[0] - mx);
      syy += (p[1] - my) * (p[1] - my);
    }
  return sxy / std::sqrt(sxx * syy);
}

Context make_context(const ExperimentConfig& cfg) {
  const RootPair roots = char_roots(cfg.params);
  const Regime regime = classify(cfg.params);
  return Context{cfg, regime, roots, rate_functions(regime, roots)};
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const Context ctx = make_context(cfg);
  validate_config(cfg, ctx);

  ExperimentReport report;
  report.config = cfg;
  report.regime = ctx.regime.tag;
  report.roots = ctx.roots;
  const std::size_t n = cfg.n_reps;

  for (std::size_t hi = 0; hi < cfg.horizons.size(); ++hi) {
    const double horizon = cfg.horizons[hi];
    const std::size_t n_steps = steps_for(cfg, horizon);
    std::vector<Rep> reps(n);
    std::vector<std::array<double, 2>> ref(n);
    parallel_for(n, cfg.threads, [&](std::size_t r) {
      const std::uint64_t index = hi * n + r;
      reps[r] = run_rep(ctx, horizon, n_steps, index, cfg.normalization);
      ref[r] = reference_draw(ctx, horizon, index);
    });

    HorizonReport hr;
    hr.horizon = horizon;
    hr.n_steps = n_steps;
    std::vector<double> c1, c2, r1, r2;
    std::vector<std::array<double, 2>> ok;
    for (std::size_t r = 0; r < n; ++r) {
      const Rep& rep = reps[r];
      if (rep.status == Status::Singular) ++hr.n_singular;
      if (rep.status == Status::Overflow) ++hr.n_overflow;
      if (rep.status != Status::Ok) continue;
      ++hr.n_ok;
      ok.push_back(rep.norm);
      if (std::isfinite(rep.norm[0])) c1.push_back(rep.norm[0]);
      if (std::isfinite(rep.norm[1])) c2.push_back(rep.norm[1]);
    }
    for (const auto& d : ref) {
      if (std::isfinite(d[0])) r1.push_back(d[0]);
      if (std::isfinite(d[1])) r2.push_back(d[1]);
    }
    if (hr.n_ok == 0)
      throw Error("experiment: every replication failed at T=" + std::to_string(horizon));
    hr.exclusion_fraction =
        static_cast<double>(n - hr.n_ok) / static_cast<double>(n);
    hr.c1 = summarize(c1, r1);
    hr.c2 = summarize(c2, r2);
    hr.correlation = pearson(ok);
    if (cfg.keep_residuals) {
      hr.residuals.resize(n);
      for (std::size_t r = 0; r < n; ++r)
        hr.residuals[r] = reps[r].status == Status::Ok
                              ? reps[r].norm
                              : std::array<double, 2>{kNaN, kNaN};
      hr.reference = ref;
    }
    report.horizons.push_back(std::move(hr));
  }
  report.wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return report;
}

ConvergenceTable convergence_study(const ExperimentConfig& cfg) {
  if (cfg.horizons.size() < 3)
    throw InvalidArgument("convergence_study: need at least 3 horizons");
  const Context ctx = make_context(cfg);
  ExperimentConfig plain = cfg;
  plain.normalization = Normalization::DeterministicRate;
  plain.comparison.kind = ComparisonKind::VsNormal;
  validate_config(plain, ctx);

  ConvergenceTable table;
  table.regime = ctx.regime.tag;
  const bool dominant = !ctx.roots.is_complex() && ctx.roots.re_p > 0 &&
                        ctx.roots.re_q < ctx.roots.re_p;
  const std::size_t n = cfg.n_reps;
  for (std::size_t hi = 0; hi < cfg.horizons.size(); ++hi) {
    const double horizon = cfg.horizons[hi];
    std::vector<Rep> reps(n);
    parallel_for(n, cfg.threads, [&](std::size_t r) {
      reps[r] = run_rep(ctx, horizon, steps_for(cfg, horizon), hi * n + r,
                        Normalization::DeterministicRate);
    });
    ConvergenceRow row;
    row.horizon = horizon;
    std::array<std::vector<double>, 2> raw, nrm, dom;
    for (const Rep& rep : reps) {
      if (rep.status != Status::Ok) continue;
      ++row.n_ok;
      for (int c = 0; c < 2; ++c) {
        const double a = std::abs(rep.diff[c]);
        raw[c].push_back(a);
        nrm[c].push_back(std::abs(rep.norm[c]));
        if (dominant) dom[c].push_back(scale_by_log(a, ctx.roots.re_p * horizon));
      }
    }
    if (row.n_ok == 0)
      throw Error("convergence_study: every replication failed at T=" +
                  std::to_string(horizon));
    auto median = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      return quantile(v, 0.5);
    };
    std::array<double, 2> dm{};
    for (int c = 0; c < 2; ++c) {
      row.raw_median[c] = median(raw[c]);
      row.normalized_median[c] = median(nrm[c]);
      if (dominant) dm[c] = median(dom[c]);
    }
    if (dominant) row.dominant_median = dm;
    table.rows.push_back(row);
  }
  for (int c = 0; c < 2; ++c) {
    bool stable = true;
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
      const double ratio =
          table.rows[i].normalized_median[c] / table.rows[i - 1].normalized_median[c];
      stable = stable && ratio >= 1.0 / 3.0 && ratio <= 3.0;
    }
    table.normalized_stable[c] = stable;
    table.raw_shrinks[c] =
        table.rows.back().raw_median[c] < table.rows.front().raw_median[c];
  }
  if (dominant) {
    std::array<double, 2> g{};
    for (int c = 0; c < 2; ++c)
      g[c] = (*table.rows.back().dominant_median)[c] /
             (*table.rows.front().dominant_median)[c];
    table.dominant_growth = g;
  }
  return table;
}

}  // namespace car2
