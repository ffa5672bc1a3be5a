#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fgf/dataset.hpp"
#include "fgf/knn.hpp"

namespace fgf {

struct Edge {
  Index target = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Weighted directed graph stored as per-node out-edge rows.
struct SparseGraph {
  std::size_t n = 0;
  std::vector<std::vector<Edge>> rows;
  std::string modality;

  SparseGraph() = default;
  explicit SparseGraph(std::size_t nodes, std::string name = {})
      : n(nodes), rows(nodes), modality(std::move(name)) {}

  std::size_t edge_count() const;
  /// Throws InvalidConfig on negative or non-finite weights, self-loops,
  /// duplicate targets, or out-of-range ids.
  void validate() const;

  friend bool operator==(const SparseGraph& a, const SparseGraph& b) {
    return a.n == b.n && a.rows == b.rows;
  }
};

enum class WeightMode {
  Literal,        // outlier-indicator count over N_k1(h_qc), an integer in [0, k1]
  JaccardScaled,  // J(h_qc, h_q) * count / k1, in [0, 1]
};

WeightMode parse_weight_mode(const std::string& name);
std::string to_string(WeightMode mode);

/// |A ∩ B| / |A ∪ B|. Inputs are treated as sets; duplicates are ignored.
/// Throws BothEmpty when both are empty.
double jaccard_sets(std::span<const Index> a, std::span<const Index> b);

/// 1 when the two neighbor sets overlap and `second_level` is a member of
/// `first_level_knn`, 0 otherwise.
int outlier_indicator(Index center, Index second_level, std::span<const Index> first_level_knn,
                      std::span<const Index> second_level_knn);

/// Ranked neighbor ids per sample, nearest first. A row may be shorter than
/// requested or missing entirely; lookups then fail with ContextIncomplete.
class NeighborTable {
 public:
  NeighborTable() = default;
  explicit NeighborTable(std::vector<std::vector<Index>> rows) : rows_(std::move(rows)) {}
  static NeighborTable from_lists(const std::vector<NeighborList>& lists);

  std::size_t size() const noexcept { return rows_.size(); }
  /// First `k` neighbors of sample `id`.
  std::span<const Index> top(Index id, std::size_t k) const;

 private:
  std::vector<std::vector<Index>> rows_;
};

struct EjgParams {
  std::size_t k = 10;
  std::size_t k1 = 0;  // 0 means "same as k"
  std::size_t k2 = 0;  // 0 means "same as k"
  WeightMode mode = WeightMode::JaccardScaled;

  std::size_t resolved_k1() const { return k1 ? k1 : k; }
  std::size_t resolved_k2() const { return k2 ? k2 : k; }
};

/// Weight of the edge from query `q` to its neighbor `neighbor`.
double edge_weight(Index neighbor, Index q, const NeighborTable& context, const EjgParams& params);

/// Extended Jaccard Graph over every sample of the index. Row q holds one
/// entry per member of N_k(q), in neighbor order, including zero weights.
SparseGraph build_ejg(const KnnIndex& index, const EjgParams& params, unsigned threads = 1,
                      std::string modality = {});

// Edge list files: CSV "src,dst,weight" or binary with a four-byte tag
// ("EJGG" for graphs).
void save_graph(const SparseGraph& g, const std::filesystem::path& path, FileFormat format,
                const char* magic = "EJGG", const char* value_column = "weight");
SparseGraph load_graph(const std::filesystem::path& path, FileFormat format,
                       const char* magic = "EJGG");

}  // namespace fgf
