#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fgf/dataset.hpp"
#include "fgf/fusion.hpp"
#include "fgf/matrix.hpp"

namespace fgf {

struct TrainConfig {
  std::size_t dim = 100;
  std::size_t samples_per_node = 100;  // M
  std::size_t negatives = 5;
  std::size_t epochs = 50;  // 0 runs no steps and returns the initialization
  double lr_start = 0.025;
  double lr_end = 1e-4;
  std::uint64_t seed = 1;
  double init_scale = 1.0;
  unsigned threads = 1;  // >1 enables lock-free parallel updates (not bitwise reproducible)

  /// Throws InvalidConfig when a field is out of range.
  void validate() const;
};

struct TrainReport {
  std::vector<double> epoch_loss;  // mean surrogate loss per positive pair
  std::uint64_t positive_pairs = 0;
  double seconds = 0.0;
};

/// Bound on |entry| of trained embeddings; larger values mean divergence.
inline constexpr double kDivergenceBound = 1e3;

struct EmbeddingPair {
  Matrix target;   // F
  Matrix context;  // auxiliary context vectors
};

/// Target entries uniform in [-init_scale/d, init_scale/d]; context zero.
EmbeddingPair init_embeddings(std::size_t n, std::size_t d, double init_scale, std::uint64_t seed);

double sigmoid(double x);
/// log(sigmoid(x)) without overflow.
double log_sigmoid(double x);

/// Gradient of log sigmoid(s * f.g) with s = +1 for positive pairs and -1
/// for negative pairs, with respect to f and g.
void log_sigmoid_gradient(std::span<const double> f, std::span<const double> g, bool positive,
                          std::span<double> grad_f, std::span<double> grad_g);

/// One ascent step on log sigmoid(+-f.g):
///   err = label - sigmoid(f.g);  f += lr*err*g;  g += lr*err*f
/// with both updates computed from the pre-step rows. Returns the pair's
/// surrogate loss (-log likelihood) before the step.
double sgd_step(std::span<double> f, std::span<double> g, bool positive, double lr);

struct TrainResult {
  EmbeddingMatrix embeddings;
  Matrix context;
  TrainReport report;
};

/// Negative-sampling SGD over the affinity's sampled context pairs. Throws
/// Divergence when any trained entry is non-finite or exceeds
/// kDivergenceBound.
TrainResult train(const AffinityMatrix& affinity, const SamplerTable& samplers,
                  const TrainConfig& config);

struct LossEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Monte Carlo estimate of the negative sampled log-likelihood: nodes are
/// drawn uniformly, one context per node from its row, plus `negatives`
/// noise nodes. Deterministic in `seed`.
LossEstimate estimate_surrogate_loss(const Matrix& target, const Matrix& context,
                                     const SamplerTable& samplers, std::size_t sample_count,
                                     std::size_t negatives, std::uint64_t seed);

double surrogate_loss(const Matrix& target, const Matrix& context, const SamplerTable& samplers,
                      std::size_t sample_count, std::size_t negatives, std::uint64_t seed);

}  // namespace fgf
