// Copyright 2026 The clusterfetch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "clusterfetch/kmeans.hpp"

#include <cmath>
#include <limits>

#include "clusterfetch/error.hpp"

namespace clusterfetch {
namespace {

double Uniform01(Prg& prg) {
  return static_cast<double>(prg.Next<std::uint64_t>() >> 11) * 0x1.0p-53;
}

// Nearest centroid per row (smallest index on ties) and its squared distance.
double Assign(const RowMatrixXf& x, const RowMatrixXf& c,
              std::vector<std::uint32_t>& labels, std::vector<double>& dist) {
  double objective = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t arg = 0;
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      const double d2 = (x.row(i) - c.row(j)).squaredNorm();
      if (d2 < best) {
        best = d2;
        arg = static_cast<std::uint32_t>(j);
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
    dist[static_cast<std::size_t>(i)] = best;
    objective += best;
  }
  return objective;
}

// Moves the farthest point of a multi-member cluster into each empty cluster.
double FillEmpty(const RowMatrixXf& x, RowMatrixXf& c,
                 std::vector<std::uint32_t>& labels, std::vector<double>& dist,
                 double objective) {
  const auto k = static_cast<std::size_t>(c.rows());
  std::vector<std::size_t> sizes(k, 0);
  for (auto l : labels) ++sizes[l];
  for (std::size_t j = 0; j < k; ++j) {
    if (sizes[j] != 0) continue;
    std::size_t far = labels.size();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (sizes[labels[i]] < 2) continue;
      if (far == labels.size() || dist[i] > dist[far]) far = i;
    }
    if (far == labels.size()) break;  // unreachable while k <= N
    --sizes[labels[far]];
    ++sizes[j];
    labels[far] = static_cast<std::uint32_t>(j);
    objective -= dist[far];
    dist[far] = 0.0;
    c.row(static_cast<Eigen::Index>(j)) = x.row(static_cast<Eigen::Index>(far));
  }
  return objective;
}

}  // namespace

std::vector<std::vector<std::uint32_t>> ClusterModel::Members() const {
  std::vector<std::vector<std::uint32_t>> out(k());
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    out[assignments[i]].push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

std::uint32_t DefaultClusterCount(std::size_t n_docs) {
  const auto k = static_cast<std::uint32_t>(std::lround(std::sqrt(static_cast<double>(n_docs))));
  return k < 1 ? 1 : k;
}

ClusterModel KMeansFit(const RowMatrixXf& x, std::uint32_t k, const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (k == 0 || k > n) {
    throw Error(ErrorCode::kInvalidK, "k = " + std::to_string(k) + " with " +
                                          std::to_string(n) + " points");
  }
  if (!x.allFinite()) throw Error(ErrorCode::kNonFiniteInput, "vectors contain NaN or Inf");

  Prg prg(options.seed);
  RowMatrixXf c(k, x.cols());

  // k-means++: first center uniform, then proportional to squared distance.
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t first = static_cast<std::size_t>(Uniform01(prg) * static_cast<double>(n));
  if (first >= n) first = n - 1;
  c.row(0) = x.row(static_cast<Eigen::Index>(first));
  for (std::uint32_t j = 1; j < k; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], static_cast<double>(
                                  (x.row(static_cast<Eigen::Index>(i)) - c.row(j - 1))
                                      .squaredNorm()));
      total += d2[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      double target = Uniform01(prg) * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        target -= d2[i];
        pick = i;
        if (target < 0.0) break;
      }
    } else {
      pick = static_cast<std::size_t>(Uniform01(prg) * static_cast<double>(n));
      if (pick >= n) pick = n - 1;
    }
    c.row(j) = x.row(static_cast<Eigen::Index>(pick));
  }

  ClusterModel model;
  model.assignments.assign(n, 0);
  std::vector<double> dist(n, 0.0);
  for (std::uint32_t iter = 0; iter < options.max_iters; ++iter) {
    double obj = Assign(x, c, model.assignments, dist);
    obj = FillEmpty(x, c, model.assignments, dist, obj);
    model.objective_trace.push_back(obj);

    RowMatrixXf next = RowMatrixXf::Zero(k, x.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      next.row(model.assignments[i]) += x.row(static_cast<Eigen::Index>(i));
      ++counts[model.assignments[i]];
    }
    double shift = 0.0;
    for (std::uint32_t j = 0; j < k; ++j) {
      next.row(j) /= static_cast<float>(counts[j]);
      shift = std::max(shift, static_cast<double>((next.row(j) - c.row(j)).norm()));
    }
    c = std::move(next);
    if (shift < options.tol) break;
  }
  double obj = Assign(x, c, model.assignments, dist);
  model.objective_trace.push_back(FillEmpty(x, c, model.assignments, dist, obj));

  if (options.normalize_centroids) NormalizeRows(c);
  model.centroids = std::move(c);
  return model;
}

}  // namespace clusterfetch
