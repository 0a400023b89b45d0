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

#ifndef CAR2_RANDOM_HPP
#define CAR2_RANDOM_HPP

#include <cstdint>
#include <random>

namespace car2 {

// Independent stream families. A draw is addressed by (seed, stream, index),
// so replications can run in any order and still reproduce bit for bit.
enum class Stream : std::uint64_t {
  Path = 1,
  LimitLaw = 2,
  Reference = 3,
};

std::uint64_t splitmix64(std::uint64_t& state);

class Rng {
 public:
  Rng(std::uint64_t seed, Stream stream, std::uint64_t index);

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  // Box-Muller; portable because it only uses the engine's raw output.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace car2

#endif  // CAR2_RANDOM_HPP
