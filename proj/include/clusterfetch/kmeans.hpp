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

#ifndef CLUSTERFETCH_KMEANS_HPP_
#define CLUSTERFETCH_KMEANS_HPP_

#include <cstdint>
#include <vector>

#include "clusterfetch/corpus.hpp"
#include "clusterfetch/prg.hpp"

namespace clusterfetch {

struct ClusterModel {
  // k x d. L2-normalized when fitted with normalize_centroids (cosine routing).
  RowMatrixXf centroids;
  // Cluster index per corpus position.
  std::vector<std::uint32_t> assignments;
  // Sum of squared distances after each assignment pass.
  std::vector<double> objective_trace;

  std::uint32_t k() const { return static_cast<std::uint32_t>(centroids.rows()); }
  std::uint32_t dim() const { return static_cast<std::uint32_t>(centroids.cols()); }

  // Corpus positions per cluster, ascending.
  std::vector<std::vector<std::uint32_t>> Members() const;
};

struct KMeansOptions {
  std::uint32_t max_iters = 50;
  double tol = 1e-4;
  Seed seed{};
  bool normalize_centroids = true;
};

// k-means++ seeding followed by Lloyd iterations until the largest centroid
// shift drops below `tol` or `max_iters` passes. Clusters left empty by an
// assignment pass take the point farthest from its centroid.
ClusterModel KMeansFit(const RowMatrixXf& vectors, std::uint32_t k,
                       const KMeansOptions& options = {});

// round(sqrt(n)), at least 1.
std::uint32_t DefaultClusterCount(std::size_t n_docs);

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_KMEANS_HPP_
