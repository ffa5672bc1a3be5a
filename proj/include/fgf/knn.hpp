#pragma once

#include <string>
#include <vector>

#include "fgf/dataset.hpp"
#include "fgf/matrix.hpp"

namespace fgf {

enum class Metric { Euclidean, Cosine };

/// Throws InvalidMetric for names other than "euclidean" and "cosine".
Metric parse_metric(const std::string& name);
std::string to_string(Metric metric);

struct NeighborList {
  Index query = 0;
  std::vector<Index> ids;  // nearest first
  std::vector<double> distances;
};

/// Exact brute-force k-nearest-neighbor index. The query sample is never
/// reported as its own neighbor; equal distances are ordered by sample index.
class KnnIndex {
 public:
  /// Throws ZeroVector for the cosine metric when a row has zero norm.
  KnnIndex(const FeatureMatrix& features, Metric metric);
  KnnIndex(const Matrix& points, Metric metric);

  std::size_t size() const noexcept { return points_.rows(); }
  Metric metric() const noexcept { return metric_; }

  double distance(Index a, Index b) const;
  /// Distance from an arbitrary vector to sample b.
  double distance_to(std::span<const double> query, Index b) const;

  /// Throws KOutOfRange unless q < n and 1 <= k <= n-1.
  NeighborList knns(Index q, std::size_t k) const;

  /// knns for every sample. Queries may be split across `threads` workers;
  /// the result is identical for any thread count.
  std::vector<NeighborList> all_knns(std::size_t k, unsigned threads = 1) const;

 private:
  void check_k(std::size_t k) const;

  Matrix points_;
  Metric metric_;
  std::vector<double> norms_;
};

}  // namespace fgf
