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

#ifndef CAR2_MONTECARLO_HPP
#define CAR2_MONTECARLO_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "car2/limit_laws.hpp"
#include "car2/model.hpp"

namespace car2 {

enum class Normalization { DeterministicRate, Nlrr, MatrixAT };
enum class ComparisonKind { VsLimitSampler, VsNormal };

std::string_view to_string(Normalization n);
std::string_view to_string(ComparisonKind k);
Normalization parse_normalization(std::string_view s);
ComparisonKind parse_comparison(std::string_view s);

struct Comparison {
  ComparisonKind kind = ComparisonKind::VsLimitSampler;
  // VsNormal reference laws for the two coordinates.
  std::array<double, 2> mean{0, 0};
  std::array<double, 2> variance{1, 1};
};

struct ExperimentConfig {
  ModelParams params;
  std::vector<double> horizons;
  std::size_t n_steps_per_unit_time = 100;
  std::size_t n_reps = 2000;
  std::uint64_t seed = 0;
  Comparison comparison;
  Normalization normalization = Normalization::DeterministicRate;
  std::size_t grid_n = 10000;
  unsigned threads = 0;  // 0 = hardware concurrency
  bool keep_residuals = false;
};

inline constexpr std::array<double, 9> kQuantileLevels = {
    0.01, 0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 0.99};

struct CoordinateSummary {
  std::array<double, 9> quantiles{};
  std::array<double, 9> reference_quantiles{};
  double ks = 0;
  double mean = 0;
  double sd = 0;
};

struct HorizonReport {
  double horizon = 0;
  std::size_t n_steps = 0;
  std::size_t n_ok = 0;
  std::size_t n_singular = 0;
  std::size_t n_overflow = 0;
  double exclusion_fraction = 0;
  // Absent for a coordinate the normalization does not cover.
  std::optional<CoordinateSummary> c1;
  std::optional<CoordinateSummary> c2;
  double correlation = 0;
  // Per replication, NaN when excluded. Filled when keep_residuals is set.
  std::vector<std::array<double, 2>> residuals;
  std::vector<std::array<double, 2>> reference;
};

struct ExperimentReport {
  ExperimentConfig config;
  RegimeTag regime{};
  RootPair roots;
  std::vector<HorizonReport> horizons;
  double wall_seconds = 0;  // never serialized
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Sup distance between the two empirical CDFs; ties handled exactly.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

// Linear interpolation between order statistics (type 7).
double quantile(std::span<const double> sorted, double level);
std::array<double, 9> quantiles(std::span<const double> values);

struct ConvergenceRow {
  double horizon = 0;
  std::array<double, 2> raw_median{};
  std::array<double, 2> normalized_median{};
  // |theta_hat - theta| e^{pT}: the larger-root control, real p > 0 only.
  std::optional<std::array<double, 2>> dominant_median;
  std::size_t n_ok = 0;
};

struct ConvergenceTable {
  RegimeTag regime{};
  std::vector<ConvergenceRow> rows;
  std::array<bool, 2> normalized_stable{};
  std::array<bool, 2> raw_shrinks{};
  // Last over first dominant-mode median, when that column exists.
  std::optional<std::array<double, 2>> dominant_growth;
};

ConvergenceTable convergence_study(const ExperimentConfig& cfg);

// Largest horizon allowed for an explosive regime: e^{pT} < 1e250.
double max_horizon(const RootPair& roots);

}  // namespace car2

#endif  // CAR2_MONTECARLO_HPP
