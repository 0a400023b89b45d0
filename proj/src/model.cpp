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

#include "car2/model.hpp"

#include <string>

namespace car2 {

std::string_view to_string(RegimeTag tag) {
  switch (tag) {
    case RegimeTag::Ergodic: return "Ergodic";
    case RegimeTag::OppositeSign: return "OppositeSign";
    case RegimeTag::DistinctPositive: return "DistinctPositive";
    case RegimeTag::PositiveDouble: return "PositiveDouble";
    case RegimeTag::LargerRootZero: return "LargerRootZero";
    case RegimeTag::SmallerRootZero: return "SmallerRootZero";
    case RegimeTag::ZeroDouble: return "ZeroDouble";
    case RegimeTag::Harmonic: return "Harmonic";
    case RegimeTag::UnstableOscillation: return "UnstableOscillation";
  }
  return "Unknown";
}

RegimeTag parse_regime(std::string_view name) {
  for (RegimeTag t : kAllRegimes)
    if (to_string(t) == name) return t;
  throw InvalidArgument("unknown regime tag: " + std::string(name));
}

}  // namespace car2
