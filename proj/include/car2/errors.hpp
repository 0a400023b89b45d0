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

#ifndef CAR2_ERRORS_HPP
#define CAR2_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace car2 {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller input: domain violations, malformed configs, mismatched options.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class SingularDesign : public Error {
 public:
  SingularDesign(double det, double threshold)
      : Error("singular design: D=" + std::to_string(det) +
              " threshold=" + std::to_string(threshold)),
        det_(det),
        threshold_(threshold) {}

  double det() const noexcept { return det_; }
  double threshold() const noexcept { return threshold_; }

 private:
  double det_;
  double threshold_;
};

class NumericOverflow : public Error {
 public:
  explicit NumericOverflow(std::size_t step)
      : Error("non-finite state at step " + std::to_string(step)),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// Requested normalization does not exist for the regime.
class NoNlrr : public Error {
 public:
  using Error::Error;
};

}  // namespace car2

#endif  // CAR2_ERRORS_HPP
