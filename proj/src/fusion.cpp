#include "fgf/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "fgf/error.hpp"

namespace fgf {

Combine parse_combine(const std::string& name) {
  if (name == "sum") return Combine::Sum;
  if (name == "max") return Combine::Max;
  throw Error(ErrorCode::InvalidConfig, "unknown combine rule '" + name + "'");
}

std::string to_string(Combine combine) { return combine == Combine::Sum ? "sum" : "max"; }

KernelInput parse_kernel_input(const std::string& name) {
  if (name == "dissimilarity") return KernelInput::Dissimilarity;
  if (name == "literal") return KernelInput::Literal;
  throw Error(ErrorCode::InvalidConfig, "unknown kernel input '" + name + "'");
}

std::string to_string(KernelInput kernel) {
  return kernel == KernelInput::Dissimilarity ? "dissimilarity" : "literal";
}

SparseGraph fuse_graphs(std::span<const SparseGraph> graphs, Combine combine) {
  if (graphs.size() < 2) throw Error(ErrorCode::InvalidConfig, "fusion needs at least two graphs");
  const std::size_t n = graphs.front().n;
  for (const auto& g : graphs) {
    if (g.n != n || g.rows.size() != n) {
      throw Error(ErrorCode::NodeCountMismatch, "graph '" + g.modality + "' has " +
                                                    std::to_string(g.n) + " nodes, expected " +
                                                    std::to_string(n));
    }
  }
  SparseGraph fused(n, "fused");
  std::vector<std::pair<Index, double>> contributions;
  for (Index i = 0; i < n; ++i) {
    contributions.clear();
    for (const auto& g : graphs) {
      for (const Edge& e : g.rows[i]) contributions.emplace_back(e.target, e.weight);
    }
    // Sorting by (target, weight) fixes the summation order, which makes
    // the floating-point result independent of graph order.
    std::sort(contributions.begin(), contributions.end());
    auto& row = fused.rows[i];
    for (std::size_t a = 0; a < contributions.size();) {
      std::size_t b = a;
      double w = 0.0;
      for (; b < contributions.size() && contributions[b].first == contributions[a].first; ++b) {
        w = (b == a) ? contributions[b].second
                     : (combine == Combine::Sum ? w + contributions[b].second
                                                : std::max(w, contributions[b].second));
      }
      row.push_back(Edge{contributions[a].first, w});
      a = b;
    }
  }
  return fused;
}

AffinityMatrix normalize_affinity(const SparseGraph& graph, KernelInput kernel, double sigma_floor) {
  if (!(sigma_floor > 0.0)) throw Error(ErrorCode::InvalidConfig, "sigma floor must be positive");
  AffinityMatrix out;
  out.n = graph.n;
  out.rows.resize(graph.n);
  out.sigma_sq.resize(graph.n);
  std::vector<double> x;
  for (Index i = 0; i < graph.n; ++i) {
    const auto& row = graph.rows[i];
    if (row.empty()) throw Error(ErrorCode::EmptyRow, "node " + std::to_string(i) + " has no edges");
    const std::size_t m = row.size();
    x.resize(m);
    double w_max = row.front().weight;
    for (const Edge& e : row) w_max = std::max(w_max, e.weight);
    for (std::size_t j = 0; j < m; ++j) {
      x[j] = kernel == KernelInput::Dissimilarity ? w_max - row[j].weight : row[j].weight;
    }
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(m);
    const double s = std::max(var, sigma_floor);
    out.sigma_sq[i] = s;

    // shift by the smallest input so the largest term is exp(0)
    const double x_min = *std::min_element(x.begin(), x.end());
    double total = 0.0;
    for (double& v : x) {
      v = std::exp(-(v - x_min) / (2.0 * s));
      total += v;
    }
    auto& dst = out.rows[i];
    dst.reserve(m);
    for (std::size_t j = 0; j < m; ++j) dst.push_back(Edge{row[j].target, x[j] / total});
  }
  return out;
}

AliasTable::AliasTable(std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw Error(ErrorCode::InvalidConfig, "alias table over an empty distribution");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::InvalidConfig, "alias weights must be finite and non-negative");
    }
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidConfig, "alias weights sum to zero");

  prob_.assign(n, 1.0);
  alias_.resize(n);
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small;
  std::vector<std::uint32_t> large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * static_cast<double>(n) / total;
    alias_[i] = static_cast<std::uint32_t>(i);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // leftovers are 1 up to rounding
  for (auto i : large) prob_[i] = 1.0;
  for (auto i : small) prob_[i] = 1.0;
}

std::size_t AliasTable::sample(Rng& rng) const {
  const std::size_t column = rng.below(prob_.size());
  return rng.uniform() < prob_[column] ? column : alias_[column];
}

double AliasTable::probability(std::size_t i) const {
  double mass = prob_[i];
  for (std::size_t j = 0; j < prob_.size(); ++j) {
    if (alias_[j] == i && j != i) mass += 1.0 - prob_[j];
  }
  return mass / static_cast<double>(prob_.size());
}

SamplerTable::SamplerTable(const AffinityMatrix& affinity, double noise_power, std::uint64_t seed)
    : noise_power_(noise_power), seed_(seed) {
  if (!std::isfinite(noise_power) || noise_power < 0.0) {
    throw Error(ErrorCode::InvalidConfig, "noise power must be finite and >= 0");
  }
  const std::size_t n = affinity.n;
  rows_.reserve(n);
  row_targets_.resize(n);
  std::vector<double> in_strength(n, 0.0);
  std::vector<double> probs;
  for (Index i = 0; i < n; ++i) {
    const auto& row = affinity.rows[i];
    if (row.empty()) throw Error(ErrorCode::EmptyRow, "node " + std::to_string(i) + " has no edges");
    probs.clear();
    for (const Edge& e : row) {
      probs.push_back(e.weight);
      row_targets_[i].push_back(e.target);
      in_strength[e.target] += e.weight;
    }
    rows_.emplace_back(probs);
  }
  noise_probs_.resize(n);
  double total = 0.0;
  for (Index j = 0; j < n; ++j) {
    noise_probs_[j] = in_strength[j] > 0.0 ? std::pow(in_strength[j], noise_power) : 0.0;
    total += noise_probs_[j];
  }
  for (double& p : noise_probs_) p /= total;
  noise_ = AliasTable(noise_probs_);
}

SamplerTable build_samplers(const AffinityMatrix& affinity, double noise_power, std::uint64_t seed) {
  return SamplerTable(affinity, noise_power, seed);
}

void save_affinity(const AffinityMatrix& affinity, const std::filesystem::path& path,
                   FileFormat format) {
  SparseGraph g(affinity.n, "affinity");
  g.rows = affinity.rows;
  save_graph(g, path, format, "EJGA", "probability");
}

AffinityMatrix load_affinity(const std::filesystem::path& path, FileFormat format) {
  SparseGraph g = load_graph(path, format, "EJGA");
  for (Index i = 0; i < g.n; ++i) {
    if (g.rows[i].empty()) continue;
    double total = 0.0;
    for (const Edge& e : g.rows[i]) total += e.weight;
    if (std::abs(total - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidConfig,
                  path.string() + ": row " + std::to_string(i) + " sums to " + std::to_string(total));
    }
  }
  AffinityMatrix a;
  a.n = g.n;
  a.rows = std::move(g.rows);
  return a;
}

}  // namespace fgf
