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

#ifndef CAR2_SIMULATOR_HPP
#define CAR2_SIMULATOR_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "car2/model.hpp"

namespace car2 {

enum class Scheme { Exact, Euler };

struct SimConfig {
  double horizon = 1.0;
  std::size_t n_steps = 1;
  Scheme scheme = Scheme::Exact;
  bool record_noise = true;
  std::uint64_t seed = 0;
  std::uint64_t replication_index = 0;
};

struct SamplePath {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> v;
  // Brownian increments, one per step, present when recorded.
  std::optional<std::vector<double>> dw;
  double sigma = 0.0;
  ModelParams params;

  std::size_t n_steps() const { return x.empty() ? 0 : x.size() - 1; }
  double horizon() const { return t.empty() ? 0.0 : t.back(); }
  double step() const { return horizon() / static_cast<double>(n_steps()); }
};

// Symmetric square root of a PSD covariance, eigenvalues below
// -1e-12 trace clipped to zero. Throws when something more negative shows up.
Eigen::Matrix3d psd_factor(const Eigen::Matrix3d& cov);

SamplePath simulate(const ModelParams& params, const SimConfig& cfg);

// X~(t) = X(alpha t): grid t_i/alpha, velocities alpha V, increments
// dw/sqrt(alpha). The attached params are those of the rescaled model.
SamplePath rescale_time(const SamplePath& path, double alpha);

// CSV with header t,x,v,dw and 17 significant digits.
void write_path_csv(const SamplePath& path, std::ostream& os);
// Reads t,x,v,dw back. Params and sigma must be attached by the caller.
SamplePath read_path_csv(std::istream& is);

}  // namespace car2

#endif  // CAR2_SIMULATOR_HPP
