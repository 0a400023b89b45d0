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

#ifndef CAR2_IO_HPP
#define CAR2_IO_HPP

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "car2/estimator.hpp"
#include "car2/limit_laws.hpp"
#include "car2/montecarlo.hpp"

namespace car2 {

// 17 significant digits: enough for a bit-exact round trip.
std::string format_double(double v);
double parse_double(std::string_view s);

// Write to a sibling temp file, then rename over the target.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);
std::string read_file(const std::filesystem::path& path);

nlohmann::json to_json(const ModelParams& p);
ModelParams params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RootPair& r);
nlohmann::json to_json(const Estimate& e);
nlohmann::json to_json(const ExperimentReport& r);
nlohmann::json to_json(const ConvergenceTable& t);

// JSON text with a trailing newline, stable key order.
std::string dump(const nlohmann::json& j);

std::string residuals_csv(const ExperimentReport& r);
std::string limit_samples_csv(const std::vector<LimitSample>& s);

}  // namespace car2

#endif  // CAR2_IO_HPP
