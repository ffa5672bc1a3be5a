#include "fgf/embed.hpp"

#include <atomic>
#include <chrono>
#include <cmath>

#include "fgf/error.hpp"
#include "fgf/parallel.hpp"

namespace fgf {

namespace {

constexpr int kMaxNegativeRedraws = 32;

// Draws a noise node different from `positive`; returns false when none was
// found within the redraw budget (e.g. the noise mass sits on one node).
bool draw_negative(const SamplerTable& samplers, Index positive, Rng& rng, Index& out) {
  for (int attempt = 0; attempt < kMaxNegativeRedraws; ++attempt) {
    out = samplers.sample_noise(rng);
    if (out != positive) return true;
  }
  return false;
}

// Lock-free variant of sgd_step for concurrent workers. Every element is
// read and written through relaxed atomics; updates from other workers may
// interleave.
double shared_step(double* f, double* g, std::size_t d, bool positive, double lr) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    s += std::atomic_ref<double>(f[k]).load(std::memory_order_relaxed) *
         std::atomic_ref<double>(g[k]).load(std::memory_order_relaxed);
  }
  const double err = (positive ? 1.0 : 0.0) - sigmoid(s);
  for (std::size_t k = 0; k < d; ++k) {
    std::atomic_ref<double> fk(f[k]);
    std::atomic_ref<double> gk(g[k]);
    const double fv = fk.load(std::memory_order_relaxed);
    const double gv = gk.load(std::memory_order_relaxed);
    fk.store(fv + lr * err * gv, std::memory_order_relaxed);
    gk.store(gv + lr * err * fv, std::memory_order_relaxed);
  }
  return positive ? -log_sigmoid(s) : -log_sigmoid(-s);
}

}  // namespace

void TrainConfig::validate() const {
  if (dim < 1) throw Error(ErrorCode::InvalidConfig, "dim must be >= 1");
  if (samples_per_node < 1) throw Error(ErrorCode::InvalidConfig, "samples_per_node must be >= 1");
  if (negatives < 1) throw Error(ErrorCode::InvalidConfig, "negatives must be >= 1");
  if (!(lr_end > 0.0) || !(lr_start >= lr_end) || !std::isfinite(lr_start)) {
    throw Error(ErrorCode::InvalidConfig, "learning rates must satisfy lr_start >= lr_end > 0");
  }
  if (!(init_scale > 0.0) || !std::isfinite(init_scale)) {
    throw Error(ErrorCode::InvalidConfig, "init_scale must be positive");
  }
  if (threads < 1) throw Error(ErrorCode::InvalidConfig, "threads must be >= 1");
}

EmbeddingPair init_embeddings(std::size_t n, std::size_t d, double init_scale, std::uint64_t seed) {
  if (n < 1 || d < 1) throw Error(ErrorCode::InvalidConfig, "init_embeddings needs n, d >= 1");
  if (!(init_scale > 0.0)) throw Error(ErrorCode::InvalidConfig, "init_scale must be positive");
  EmbeddingPair out{Matrix(n, d), Matrix(n, d)};
  Rng rng(seed);
  const double bound = init_scale / static_cast<double>(d);
  for (double& v : out.target.values()) v = (2.0 * rng.uniform() - 1.0) * bound;
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

void log_sigmoid_gradient(std::span<const double> f, std::span<const double> g, bool positive,
                          std::span<double> grad_f, std::span<double> grad_g) {
  const double err = (positive ? 1.0 : 0.0) - sigmoid(dot(f, g));
  for (std::size_t k = 0; k < f.size(); ++k) {
    grad_f[k] = err * g[k];
    grad_g[k] = err * f[k];
  }
}

double sgd_step(std::span<double> f, std::span<double> g, bool positive, double lr) {
  const double s = dot(f, g);
  const double err = (positive ? 1.0 : 0.0) - sigmoid(s);
  const double scale = lr * err;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double fk = f[k];
    f[k] += scale * g[k];
    g[k] += scale * fk;
  }
  return positive ? -log_sigmoid(s) : -log_sigmoid(-s);
}

TrainResult train(const AffinityMatrix& affinity, const SamplerTable& samplers,
                  const TrainConfig& config) {
  config.validate();
  const std::size_t n = affinity.n;
  if (samplers.size() != n) {
    throw Error(ErrorCode::NodeCountMismatch, "sampler table covers " +
                                                  std::to_string(samplers.size()) +
                                                  " nodes, affinity has " + std::to_string(n));
  }
  const auto started = std::chrono::steady_clock::now();
  const std::size_t d = config.dim;
  const std::size_t per_node = config.samples_per_node;
  auto [target, context] =
      init_embeddings(n, d, config.init_scale, derive_seed(config.seed, "init"));

  TrainReport report;
  const std::uint64_t total_steps = static_cast<std::uint64_t>(config.epochs) * n * per_node;
  const double lr_span = config.lr_start - config.lr_end;
  auto rate_at = [&](std::uint64_t step) {
    return config.lr_start - lr_span * (static_cast<double>(step) / static_cast<double>(total_steps));
  };

  if (config.threads == 1) {
    Rng rng = samplers.stream(derive_seed(config.seed, "train"));
    std::uint64_t step = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      double loss = 0.0;
      for (Index i = 0; i < n; ++i) {
        auto fi = target.row(i);
        for (std::size_t m = 0; m < per_node; ++m, ++step) {
          const double lr = rate_at(step);
          const Index j = samplers.sample_context(i, rng);
          loss += sgd_step(fi, context.row(j), true, lr);
          for (std::size_t neg = 0; neg < config.negatives; ++neg) {
            Index noise = 0;
            if (!draw_negative(samplers, j, rng, noise)) break;
            loss += sgd_step(fi, context.row(noise), false, lr);
          }
        }
      }
      report.epoch_loss.push_back(loss / static_cast<double>(n * per_node));
    }
    report.positive_pairs = step;
  } else {
    // Workers own disjoint node ranges but share context rows without locks.
    const unsigned workers = config.threads;
    std::vector<Rng> streams;
    for (unsigned t = 0; t < workers; ++t) {
      streams.push_back(samplers.stream(derive_seed(config.seed, "train", t)));
    }
    std::atomic<std::uint64_t> step{0};
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      std::vector<double> losses(workers, 0.0);
      const std::size_t chunk = (n + workers - 1) / workers;
      parallel_for(workers, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
          Rng& rng = streams[t];
          const Index first = std::min(n, t * chunk);
          const Index last = std::min(n, first + chunk);
          double loss = 0.0;
          for (Index i = first; i < last; ++i) {
            double* fi = target.row(i).data();
            for (std::size_t m = 0; m < per_node; ++m) {
              const double lr = rate_at(step.fetch_add(1, std::memory_order_relaxed));
              const Index j = samplers.sample_context(i, rng);
              loss += shared_step(fi, context.row(j).data(), d, true, lr);
              for (std::size_t neg = 0; neg < config.negatives; ++neg) {
                Index noise = 0;
                if (!draw_negative(samplers, j, rng, noise)) break;
                loss += shared_step(fi, context.row(noise).data(), d, false, lr);
              }
            }
          }
          losses[t] = loss;
        }
      });
      double loss = 0.0;
      for (double l : losses) loss += l;
      report.epoch_loss.push_back(loss / static_cast<double>(n * per_node));
    }
    report.positive_pairs = step.load();
  }

  for (double v : target.values()) {
    if (!std::isfinite(v) || std::abs(v) > kDivergenceBound) {
      throw Error(ErrorCode::Divergence, "embedding entry " + std::to_string(v) +
                                             " exceeds the divergence bound");
    }
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return TrainResult{EmbeddingMatrix(std::move(target)), std::move(context), std::move(report)};
}

LossEstimate estimate_surrogate_loss(const Matrix& target, const Matrix& context,
                                     const SamplerTable& samplers, std::size_t sample_count,
                                     std::size_t negatives, std::uint64_t seed) {
  const std::size_t n = target.rows();
  if (context.rows() != n || samplers.size() != n || context.cols() != target.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "embedding and sampler shapes disagree");
  }
  if (sample_count == 0) throw Error(ErrorCode::InvalidConfig, "sample_count must be >= 1");
  Rng rng(derive_seed(seed, "surrogate-loss"));
  // Welford accumulation: exact zero variance for constant losses.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t s = 0; s < sample_count; ++s) {
    const Index i = rng.below(n);
    const Index j = samplers.sample_context(i, rng);
    double loss = -log_sigmoid(dot(target.row(i), context.row(j)));
    for (std::size_t neg = 0; neg < negatives; ++neg) {
      Index noise = 0;
      if (!draw_negative(samplers, j, rng, noise)) break;
      loss -= log_sigmoid(-dot(target.row(i), context.row(noise)));
    }
    const double delta = loss - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (loss - mean);
  }
  const double count = static_cast<double>(sample_count);
  const double var = sample_count > 1 ? m2 / (count - 1) : 0.0;
  return LossEstimate{mean, std::sqrt(var / count)};
}

double surrogate_loss(const Matrix& target, const Matrix& context, const SamplerTable& samplers,
                      std::size_t sample_count, std::size_t negatives, std::uint64_t seed) {
  return estimate_surrogate_loss(target, context, samplers, sample_count, negatives, seed).mean;
}

}  // namespace fgf
