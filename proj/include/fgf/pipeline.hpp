#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fgf/dataset.hpp"
#include "fgf/ejgraph.hpp"
#include "fgf/embed.hpp"
#include "fgf/evaluation.hpp"
#include "fgf/fusion.hpp"

namespace fgf {

struct ModalitySource {
  std::string name;
  std::filesystem::path path;
  FileFormat format = FileFormat::Csv;
  bool header = false;
};

/// Every hyperparameter of a run. The JSON form uses flat keys matching the
/// CLI flag names (see config_from_json).
struct PipelineConfig {
  std::vector<ModalitySource> features;
  std::filesystem::path labels;

  std::vector<std::size_t> k_values{10};
  std::vector<std::size_t> d_values{100};
  std::size_t k1 = 0;  // 0: same as k
  std::size_t k2 = 0;  // 0: same as k
  Metric metric = Metric::Euclidean;
  WeightMode weight_mode = WeightMode::JaccardScaled;
  Combine combine = Combine::Sum;
  KernelInput kernel = KernelInput::Dissimilarity;
  double sigma_floor = kSigmaFloor;
  double noise_power = 0.75;

  // dim and seed are set per sweep cell
  TrainConfig train;

  Metric feature_eval_metric = Metric::Euclidean;
  Metric embedding_eval_metric = Metric::Cosine;
  std::size_t votes = 1;
  SplitSpec split;

  std::uint64_t seed = 0;
  bool baselines = true;

  std::filesystem::path out_dir;  // empty: nothing written
  FileFormat embedding_format = FileFormat::Binary;
  bool write_embeddings = true;

  /// Throws InvalidConfig on empty sweeps or out-of-range values.
  void validate() const;
};

/// Throws InvalidConfig for unknown keys or mistyped values.
PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& config);

struct PipelineResult {
  ResultTable table;
  nlohmann::json manifest;
};

/// Loads the configured files, then runs the in-memory pipeline.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Baselines (each modality, then the z-scored concatenation) followed by
/// one FGF row per (k, d), all evaluated on the same splits. Errors are
/// rethrown with the failing stage name prepended.
PipelineResult run_pipeline(const PipelineConfig& config, const std::vector<FeatureMatrix>& features,
                            const LabelVector& labels);

/// The FGF chain for one k: per-modality graphs, fusion, normalization.
AffinityMatrix build_fused_affinity(const std::vector<FeatureMatrix>& features, std::size_t k,
                                    const PipelineConfig& config);

}  // namespace fgf
