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

#include "car2/simulator.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "car2/io.hpp"
#include "car2/random.hpp"

namespace car2 {

Eigen::Matrix3d psd_factor(const Eigen::Matrix3d& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  if (es.info() != Eigen::Success)
    throw Error("psd_factor: eigen decomposition failed");
  const double floor = -1e-12 * std::max(cov.trace(), 0.0);
  Eigen::Vector3d ev = es.eigenvalues();
  for (int i = 0; i < 3; ++i) {
    if (ev(i) < floor && ev(i) < 0)
      throw Error("psd_factor: covariance is not positive semidefinite");
    ev(i) = ev(i) > 0 ? std::sqrt(ev(i)) : 0.0;
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

namespace {

void check_config(const SimConfig& cfg) {
  if (!(cfg.horizon > 0) || !std::isfinite(cfg.horizon))
    throw InvalidArgument("simulate: horizon must be finite and > 0");
  if (cfg.n_steps < 1) throw InvalidArgument("simulate: n_steps must be >= 1");
}

}  // namespace

SamplePath simulate(const ModelParams& params, const SimConfig& cfg) {
  validate(params);
  check_config(cfg);
  const std::size_t n = cfg.n_steps;
  const double h = cfg.horizon / static_cast<double>(n);
  const bool noisy = params.sigma > 0;

  SamplePath path;
  path.sigma = params.sigma;
  path.params = params;
  path.t.resize(n + 1);
  path.x.resize(n + 1);
  path.v.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    path.t[i] = static_cast<double>(i) * h;
  path.t[n] = cfg.horizon;
  if (cfg.record_noise) path.dw.emplace(n, 0.0);

  Rng rng(cfg.seed, Stream::Path, cfg.replication_index);
  double x = params.x0, v = params.dx0;
  path.x[0] = x;
  path.v[0] = v;

  if (cfg.scheme == Scheme::Exact) {
    const TransitionKernel k = transition(params, h);
    const Eigen::Matrix3d l = noisy ? psd_factor(k.cov_matrix)
                                    : Eigen::Matrix3d::Zero().eval();
    const Eigen::Matrix2d& m = k.mean_matrix;
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::Vector3d z = Eigen::Vector3d::Zero();
      if (noisy) {
        const Eigen::Vector3d e(rng.normal(), rng.normal(), rng.normal());
        z.noalias() = l * e;
      }
      const double xn = m(0, 0) * x + m(0, 1) * v + z(1);
      const double vn = m(1, 0) * x + m(1, 1) * v + z(2);
      x = xn;
      v = vn;
      if (!std::isfinite(x) || !std::isfinite(v)) throw NumericOverflow(i + 1);
      path.x[i + 1] = x;
      path.v[i + 1] = v;
      if (path.dw) (*path.dw)[i] = z(0);
    }
  } else {
    const double sq = std::sqrt(h);
    for (std::size_t i = 0; i < n; ++i) {
      const double dw = noisy ? sq * rng.normal() : 0.0;
      const double xn = x + v * h;
      const double vn =
          v + (params.theta2 * x + params.theta1 * v) * h + params.sigma * dw;
      x = xn;
      v = vn;
      if (!std::isfinite(x) || !std::isfinite(v)) throw NumericOverflow(i + 1);
      path.x[i + 1] = x;
      path.v[i + 1] = v;
      if (path.dw) (*path.dw)[i] = dw;
    }
  }
  return path;
}

SamplePath rescale_time(const SamplePath& path, double alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha))
    throw InvalidArgument("rescale_time: alpha must be finite and > 0");
  if (alpha == 1.0) return path;
  SamplePath out = path;
  for (double& t : out.t) t /= alpha;
  for (double& v : out.v) v *= alpha;
  if (path.dw) {
    std::vector<double> dw = *path.dw;
    for (double& d : dw) d /= std::sqrt(alpha);
    out.dw = std::move(dw);
  }
  const double s = std::pow(alpha, 1.5);
  out.sigma = path.sigma * s;
  out.params.theta1 = path.params.theta1 * alpha;
  out.params.theta2 = path.params.theta2 * alpha * alpha;
  out.params.sigma = path.params.sigma * s;
  out.params.dx0 = path.params.dx0 * alpha;
  return out;
}

void write_path_csv(const SamplePath& path, std::ostream& os) {
  os << "t,x,v,dw\n";
  const std::size_t n = path.n_steps();
  for (std::size_t i = 0; i <= n; ++i) {
    os << format_double(path.t[i]) << ',' << format_double(path.x[i]) << ','
       << format_double(path.v[i]) << ',';
    if (path.dw && i < n) os << format_double((*path.dw)[i]);
    os << '\n';
  }
}

SamplePath read_path_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw InvalidArgument("path csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,x,v,dw")
    throw InvalidArgument("path csv: expected header t,x,v,dw");

  SamplePath path;
  std::vector<double> dw;
  std::size_t n_dw = 0;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell[4];
    for (int c = 0; c < 4; ++c) std::getline(ss, cell[c], ',');
    try {
      path.t.push_back(parse_double(cell[0]));
      path.x.push_back(parse_double(cell[1]));
      path.v.push_back(parse_double(cell[2]));
      dw.push_back(cell[3].empty() ? 0.0 : parse_double(cell[3]));
      if (!cell[3].empty()) ++n_dw;
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("path csv row " + std::to_string(row) + ": " +
                            e.what());
    }
  }
  if (path.x.size() < 2) throw InvalidArgument("path csv: need >= 2 rows");
  // The last row never carries an increment.
  dw.pop_back();
  if (n_dw > 0) {
    if (n_dw != dw.size())
      throw InvalidArgument("path csv: dw column is only partially filled");
    path.dw = std::move(dw);
  }
  return path;
}

}  // namespace car2
