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

#include "car2/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace car2 {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view s) {
  const std::string str(s);
  if (str.empty()) throw InvalidArgument("empty number");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (end != str.c_str() + str.size() || errno == ERANGE)
    throw InvalidArgument("not a number: '" + str + "'");
  return v;
}

void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw InvalidArgument("cannot open " + tmp.string() + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw InvalidArgument("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

namespace {

// NaN and infinities become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json array9(const std::array<double, 9>& a) {
  json out = json::array();
  for (double v : a) out.push_back(num(v));
  return out;
}

json coordinate(const std::optional<CoordinateSummary>& c) {
  if (!c) return nullptr;
  return {{"quantiles", array9(c->quantiles)},
          {"reference_quantiles", array9(c->reference_quantiles)},
          {"ks", num(c->ks)},
          {"mean", num(c->mean)},
          {"sd", num(c->sd)}};
}

}  // namespace

json to_json(const ModelParams& p) {
  return {{"theta1", p.theta1}, {"theta2", p.theta2}, {"sigma", p.sigma},
          {"x0", p.x0},         {"dx0", p.dx0}};
}

ModelParams params_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("params must be an object");
  ModelParams p;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number())
      throw InvalidArgument("params." + key + " must be a number");
    const double v = value.get<double>();
    if (key == "theta1") p.theta1 = v;
    else if (key == "theta2") p.theta2 = v;
    else if (key == "sigma") p.sigma = v;
    else if (key == "x0") p.x0 = v;
    else if (key == "dx0") p.dx0 = v;
    else throw InvalidArgument("unknown key params." + key);
  }
  validate(p);
  return p;
}

json to_json(const RootPair& r) {
  return {{"p", {{"re", r.re_p}, {"im", r.im_p}}},
          {"q", {{"re", r.re_q}, {"im", r.im_q}}}};
}

json to_json(const Estimate& e) {
  return {{"theta1_hat", num(e.theta1_hat)},
          {"theta2_hat", num(e.theta2_hat)},
          {"det_D", num(e.det_d)},
          {"psi", {{num(e.psi(0, 0)), num(e.psi(0, 1))},
                   {num(e.psi(1, 0)), num(e.psi(1, 1))}}},
          {"design_rcond", num(e.design_rcond)},
          {"ill_conditioned", e.ill_conditioned}};
}

json to_json(const ExperimentReport& r) {
  const ExperimentConfig& c = r.config;
  json cmp = {{"kind", std::string(to_string(c.comparison.kind))}};
  if (c.comparison.kind == ComparisonKind::VsNormal) {
    cmp["mean"] = c.comparison.mean;
    cmp["variance"] = c.comparison.variance;
  }
  json out;
  out["regime"] = std::string(to_string(r.regime));
  out["roots"] = to_json(r.roots);
  out["params"] = to_json(c.params);
  out["seed"] = c.seed;
  out["n_reps"] = c.n_reps;
  out["n_steps_per_unit_time"] = c.n_steps_per_unit_time;
  out["normalization"] = std::string(to_string(c.normalization));
  out["comparison"] = cmp;
  out["grid_n"] = c.grid_n;
  out["quantile_levels"] = kQuantileLevels;
  json hs = json::array();
  for (const HorizonReport& h : r.horizons) {
    hs.push_back({{"T", h.horizon},
                  {"n_steps", h.n_steps},
                  {"n_ok", h.n_ok},
                  {"n_singular", h.n_singular},
                  {"n_overflow", h.n_overflow},
                  {"exclusion_fraction", h.exclusion_fraction},
                  {"coordinate1", coordinate(h.c1)},
                  {"coordinate2", coordinate(h.c2)},
                  {"correlation", num(h.correlation)}});
  }
  out["horizons"] = hs;
  return out;
}

json to_json(const ConvergenceTable& t) {
  json rows = json::array();
  for (const ConvergenceRow& r : t.rows) {
    json row = {{"T", r.horizon},
                {"n_ok", r.n_ok},
                {"raw_median", {num(r.raw_median[0]), num(r.raw_median[1])}},
                {"normalized_median",
                 {num(r.normalized_median[0]), num(r.normalized_median[1])}}};
    if (r.dominant_median)
      row["dominant_median"] = {num((*r.dominant_median)[0]),
                                num((*r.dominant_median)[1])};
    rows.push_back(row);
  }
  json out = {{"regime", std::string(to_string(t.regime))},
              {"rows", rows},
              {"normalized_stable", t.normalized_stable},
              {"raw_shrinks", t.raw_shrinks}};
  if (t.dominant_growth)
    out["dominant_growth"] = {num((*t.dominant_growth)[0]),
                              num((*t.dominant_growth)[1])};
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string residuals_csv(const ExperimentReport& r) {
  std::string out = "rep,T,r1,r2\n";
  for (const HorizonReport& h : r.horizons)
    for (std::size_t i = 0; i < h.residuals.size(); ++i) {
      out += std::to_string(i) + ',' + format_double(h.horizon) + ',' +
             format_double(h.residuals[i][0]) + ',' +
             format_double(h.residuals[i][1]) + '\n';
    }
  return out;
}

std::string limit_samples_csv(const std::vector<LimitSample>& s) {
  std::string out = "l1,l2\n";
  for (const LimitSample& x : s)
    out += format_double(x.l1) + ',' + format_double(x.l2) + '\n';
  return out;
}

}  // namespace car2
