#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fgf/ejgraph.hpp"
#include "fgf/random.hpp"

namespace fgf {

enum class Combine { Sum, Max };
enum class KernelInput {
  Dissimilarity,  // row max minus weight, so heavier edges get more mass
  Literal,        // raw weights, exactly as the kernel is printed
};

Combine parse_combine(const std::string& name);
std::string to_string(Combine combine);
KernelInput parse_kernel_input(const std::string& name);
std::string to_string(KernelInput kernel);

/// Edge union of graphs over the same node set. Weights of edges present in
/// several graphs are combined with `combine`; others pass through. Output
/// rows are sorted by target id and the result does not depend on the order
/// of `graphs`. Throws InvalidConfig for fewer than two graphs and
/// NodeCountMismatch when node counts differ.
SparseGraph fuse_graphs(std::span<const SparseGraph> graphs, Combine combine = Combine::Sum);

inline constexpr double kSigmaFloor = 1e-8;

/// Row-stochastic affinity over the fused KNN support.
struct AffinityMatrix {
  std::size_t n = 0;
  std::vector<std::vector<Edge>> rows;  // weight holds the probability
  std::vector<double> sigma_sq;         // per-row kernel bandwidth; empty when loaded from file

  std::size_t support(Index i) const { return rows[i].size(); }
};

/// Gaussian-kernel normalization of every row:
///   W_ij = exp(-x_ij / (2 s_i)) / sum_j' exp(-x_ij' / (2 s_i))
/// where x is the kernel input selected by `kernel` and s_i is the
/// population variance of row i's inputs, floored at `sigma_floor`.
/// Throws EmptyRow if any row has no edges.
AffinityMatrix normalize_affinity(const SparseGraph& graph,
                                  KernelInput kernel = KernelInput::Dissimilarity,
                                  double sigma_floor = kSigmaFloor);

/// Walker/Vose alias table: O(1) draws from a fixed discrete distribution.
class AliasTable {
 public:
  AliasTable() = default;
  /// Weights must be non-negative with a positive sum.
  explicit AliasTable(std::span<const double> weights);

  std::size_t size() const noexcept { return prob_.size(); }
  std::size_t sample(Rng& rng) const;
  /// Probability of outcome i implied by the table.
  double probability(std::size_t i) const;

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

/// Per-row context samplers plus the global negative-sampling distribution
/// (node in-strength raised to `noise_power`).
class SamplerTable {
 public:
  SamplerTable(const AffinityMatrix& affinity, double noise_power, std::uint64_t seed);

  std::size_t size() const noexcept { return rows_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }
  double noise_power() const noexcept { return noise_power_; }

  /// Independent random stream for consumer `stream_id`.
  Rng stream(std::uint64_t stream_id) const { return Rng(derive_seed(seed_, "sampler", stream_id)); }

  Index sample_context(Index node, Rng& rng) const {
    return row_targets_[node][rows_[node].sample(rng)];
  }
  Index sample_noise(Rng& rng) const { return noise_.sample(rng); }

  const std::vector<double>& noise_distribution() const noexcept { return noise_probs_; }

 private:
  std::vector<AliasTable> rows_;
  std::vector<std::vector<Index>> row_targets_;
  AliasTable noise_;
  std::vector<double> noise_probs_;
  double noise_power_;
  std::uint64_t seed_;
};

SamplerTable build_samplers(const AffinityMatrix& affinity, double noise_power = 0.75,
                            std::uint64_t seed = 0);

/// Same edge-list layouts as graphs, tagged "EJGA" with a "probability" column.
void save_affinity(const AffinityMatrix& affinity, const std::filesystem::path& path,
                   FileFormat format);
/// Throws InvalidConfig when a row does not sum to one.
AffinityMatrix load_affinity(const std::filesystem::path& path, FileFormat format);

}  // namespace fgf
