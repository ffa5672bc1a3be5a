#include "fgf/knn.hpp"

#include <algorithm>
#include <cmath>

#include "fgf/error.hpp"
#include "fgf/parallel.hpp"

namespace fgf {

Metric parse_metric(const std::string& name) {
  if (name == "euclidean") return Metric::Euclidean;
  if (name == "cosine") return Metric::Cosine;
  throw Error(ErrorCode::InvalidMetric, "unknown metric '" + name + "'");
}

std::string to_string(Metric metric) {
  return metric == Metric::Euclidean ? "euclidean" : "cosine";
}

KnnIndex::KnnIndex(const FeatureMatrix& features, Metric metric)
    : KnnIndex(features.values(), metric) {}

KnnIndex::KnnIndex(const Matrix& points, Metric metric) : points_(points), metric_(metric) {
  if (metric_ != Metric::Euclidean && metric_ != Metric::Cosine) {
    throw Error(ErrorCode::InvalidMetric, "unsupported metric");
  }
  if (metric_ == Metric::Cosine) {
    norms_.resize(points_.rows());
    for (Index i = 0; i < points_.rows(); ++i) {
      norms_[i] = std::sqrt(dot(points_.row(i), points_.row(i)));
      if (norms_[i] == 0.0) {
        throw Error(ErrorCode::ZeroVector,
                    "row " + std::to_string(i) + " has zero norm under the cosine metric");
      }
    }
  }
}

double KnnIndex::distance_to(std::span<const double> query, Index b) const {
  const auto pb = points_.row(b);
  if (metric_ == Metric::Euclidean) {
    double s = 0.0;
    for (std::size_t j = 0; j < pb.size(); ++j) {
      const double diff = query[j] - pb[j];
      s += diff * diff;
    }
    return std::sqrt(s);
  }
  const double qn = std::sqrt(dot(query, query));
  if (qn == 0.0) throw Error(ErrorCode::ZeroVector, "zero-norm query under the cosine metric");
  return std::max(0.0, 1.0 - dot(query, pb) / (qn * norms_[b]));
}

double KnnIndex::distance(Index a, Index b) const {
  if (metric_ == Metric::Euclidean) return distance_to(points_.row(a), b);
  if (a == b) return 0.0;
  const double cos = dot(points_.row(a), points_.row(b)) / (norms_[a] * norms_[b]);
  return std::max(0.0, 1.0 - cos);
}

void KnnIndex::check_k(std::size_t k) const {
  if (k < 1 || k + 1 > points_.rows()) {
    throw Error(ErrorCode::KOutOfRange, "k=" + std::to_string(k) + " must lie in [1, " +
                                            std::to_string(points_.rows() - 1) + "]");
  }
}

NeighborList KnnIndex::knns(Index q, std::size_t k) const {
  if (q >= points_.rows()) {
    throw Error(ErrorCode::KOutOfRange, "query " + std::to_string(q) + " out of range");
  }
  check_k(k);
  std::vector<std::pair<double, Index>> candidates;
  candidates.reserve(points_.rows() - 1);
  for (Index j = 0; j < points_.rows(); ++j) {
    if (j != q) candidates.emplace_back(distance(q, j), j);
  }
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                    candidates.end());
  NeighborList out;
  out.query = q;
  out.ids.reserve(k);
  out.distances.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.distances.push_back(candidates[i].first);
    out.ids.push_back(candidates[i].second);
  }
  return out;
}

std::vector<NeighborList> KnnIndex::all_knns(std::size_t k, unsigned threads) const {
  check_k(k);
  std::vector<NeighborList> lists(points_.rows());
  parallel_for(points_.rows(), threads, [&](std::size_t begin, std::size_t end) {
    for (Index q = begin; q < end; ++q) lists[q] = knns(q, k);
  });
  return lists;
}

}  // namespace fgf
