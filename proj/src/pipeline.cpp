#include "fgf/pipeline.hpp"

#include <fstream>
#include <set>

#include "fgf/error.hpp"
#include "fgf/io_util.hpp"

namespace fgf {

namespace {

using nlohmann::json;

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage '") + stage + "': " + e.what());
  }
}

template <typename T>
T get_as(const json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, "config key '" + key + "': " + e.what());
  }
}

std::vector<std::size_t> size_list(const json& value, const std::string& key) {
  if (value.is_array()) return get_as<std::vector<std::size_t>>(value, key);
  return {get_as<std::size_t>(value, key)};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out = io::open_output(path, false);
  out << text;
  io::finish_output(out, path);
}

std::string cell_file(std::size_t k, std::size_t d, FileFormat format) {
  return "fgf_k" + std::to_string(k) + "_d" + std::to_string(d) +
         (format == FileFormat::Binary ? ".bin" : ".csv");
}

}  // namespace

void PipelineConfig::validate() const {
  if (k_values.empty() || d_values.empty()) {
    throw Error(ErrorCode::InvalidConfig, "k and d sweeps must be non-empty");
  }
  for (auto k : k_values) {
    if (k < 1) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
  }
  for (auto d : d_values) {
    if (d < 1) throw Error(ErrorCode::InvalidConfig, "d must be >= 1");
  }
  if (!(sigma_floor > 0.0)) throw Error(ErrorCode::InvalidConfig, "sigma_floor must be positive");
  if (!(noise_power >= 0.0)) throw Error(ErrorCode::InvalidConfig, "noise_power must be >= 0");
  if (votes < 1) throw Error(ErrorCode::InvalidConfig, "votes must be >= 1");
  train.validate();
}

PipelineConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "pipeline config must be a JSON object");
  PipelineConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "features") {
      if (!value.is_array()) throw Error(ErrorCode::InvalidConfig, "'features' must be an array");
      c.features.clear();
      for (const auto& f : value) {
        ModalitySource src;
        if (f.is_string()) {
          src.path = f.get<std::string>();
        } else if (f.is_object()) {
          src.path = get_as<std::string>(f.at("path"), "features.path");
          if (f.contains("name")) src.name = get_as<std::string>(f["name"], "features.name");
          if (f.contains("format")) src.format = parse_file_format(get_as<std::string>(f["format"], "features.format"));
          if (f.contains("header")) src.header = get_as<bool>(f["header"], "features.header");
        } else {
          throw Error(ErrorCode::InvalidConfig, "feature entries must be paths or objects");
        }
        if (src.name.empty()) src.name = src.path.stem().string();
        c.features.push_back(std::move(src));
      }
    } else if (key == "labels") {
      c.labels = get_as<std::string>(value, key);
    } else if (key == "k") {
      c.k_values = size_list(value, key);
    } else if (key == "d" || key == "dim") {
      c.d_values = size_list(value, key);
    } else if (key == "k1") {
      c.k1 = get_as<std::size_t>(value, key);
    } else if (key == "k2") {
      c.k2 = get_as<std::size_t>(value, key);
    } else if (key == "metric") {
      c.metric = parse_metric(get_as<std::string>(value, key));
    } else if (key == "weight_mode") {
      c.weight_mode = parse_weight_mode(get_as<std::string>(value, key));
    } else if (key == "combine") {
      c.combine = parse_combine(get_as<std::string>(value, key));
    } else if (key == "kernel") {
      c.kernel = parse_kernel_input(get_as<std::string>(value, key));
    } else if (key == "sigma_floor") {
      c.sigma_floor = get_as<double>(value, key);
    } else if (key == "noise_power") {
      c.noise_power = get_as<double>(value, key);
    } else if (key == "samples_per_node") {
      c.train.samples_per_node = get_as<std::size_t>(value, key);
    } else if (key == "negatives") {
      c.train.negatives = get_as<std::size_t>(value, key);
    } else if (key == "epochs") {
      c.train.epochs = get_as<std::size_t>(value, key);
    } else if (key == "lr") {
      c.train.lr_start = get_as<double>(value, key);
    } else if (key == "lr_end") {
      c.train.lr_end = get_as<double>(value, key);
    } else if (key == "init_scale") {
      c.train.init_scale = get_as<double>(value, key);
    } else if (key == "threads") {
      c.train.threads = get_as<unsigned>(value, key);
    } else if (key == "eval_metric") {
      c.feature_eval_metric = parse_metric(get_as<std::string>(value, key));
    } else if (key == "embedding_eval_metric") {
      c.embedding_eval_metric = parse_metric(get_as<std::string>(value, key));
    } else if (key == "votes") {
      c.votes = get_as<std::size_t>(value, key);
    } else if (key == "protocol") {
      c.split.protocol = parse_split_protocol(get_as<std::string>(value, key));
    } else if (key == "m") {
      c.split.m = get_as<std::size_t>(value, key);
    } else if (key == "fraction") {
      c.split.fraction = get_as<double>(value, key);
    } else if (key == "repeats") {
      c.split.repeats = get_as<std::size_t>(value, key);
    } else if (key == "seed") {
      c.seed = get_as<std::uint64_t>(value, key);
    } else if (key == "baselines") {
      c.baselines = get_as<bool>(value, key);
    } else if (key == "out_dir") {
      c.out_dir = get_as<std::string>(value, key);
    } else if (key == "embedding_format") {
      c.embedding_format = parse_file_format(get_as<std::string>(value, key));
    } else if (key == "write_embeddings") {
      c.write_embeddings = get_as<bool>(value, key);
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
    }
  }
  return c;
}

json config_to_json(const PipelineConfig& c) {
  json features = json::array();
  for (const auto& f : c.features) {
    features.push_back({{"name", f.name},
                        {"path", f.path.string()},
                        {"format", to_string(f.format)},
                        {"header", f.header}});
  }
  return json{
      {"features", features},
      {"labels", c.labels.string()},
      {"k", c.k_values},
      {"d", c.d_values},
      {"k1", c.k1},
      {"k2", c.k2},
      {"metric", to_string(c.metric)},
      {"weight_mode", to_string(c.weight_mode)},
      {"combine", to_string(c.combine)},
      {"kernel", to_string(c.kernel)},
      {"sigma_floor", c.sigma_floor},
      {"noise_power", c.noise_power},
      {"samples_per_node", c.train.samples_per_node},
      {"negatives", c.train.negatives},
      {"epochs", c.train.epochs},
      {"lr", c.train.lr_start},
      {"lr_end", c.train.lr_end},
      {"init_scale", c.train.init_scale},
      {"threads", c.train.threads},
      {"eval_metric", to_string(c.feature_eval_metric)},
      {"embedding_eval_metric", to_string(c.embedding_eval_metric)},
      {"votes", c.votes},
      {"protocol", to_string(c.split.protocol)},
      {"m", c.split.m},
      {"fraction", c.split.fraction},
      {"repeats", c.split.repeats},
      {"seed", c.seed},
      {"baselines", c.baselines},
      {"out_dir", c.out_dir.string()},
      {"embedding_format", to_string(c.embedding_format)},
      {"write_embeddings", c.write_embeddings},
  };
}

AffinityMatrix build_fused_affinity(const std::vector<FeatureMatrix>& features, std::size_t k,
                                    const PipelineConfig& config) {
  EjgParams params;
  params.k = k;
  params.k1 = config.k1;
  params.k2 = config.k2;
  params.mode = config.weight_mode;
  std::vector<SparseGraph> graphs;
  for (const auto& f : features) {
    const KnnIndex index = in_stage("knn", [&] { return KnnIndex(f, config.metric); });
    graphs.push_back(in_stage("ejgraph", [&] {
      return build_ejg(index, params, config.train.threads, f.modality());
    }));
  }
  const SparseGraph fused = in_stage("fusion", [&] {
    return graphs.size() == 1 ? graphs.front() : fuse_graphs(graphs, config.combine);
  });
  return in_stage("normalize", [&] {
    return normalize_affinity(fused, config.kernel, config.sigma_floor);
  });
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  if (config.features.empty()) throw Error(ErrorCode::InvalidConfig, "no feature files configured");
  if (config.labels.empty()) throw Error(ErrorCode::InvalidConfig, "no labels file configured");
  std::vector<FeatureMatrix> features;
  in_stage("load", [&] {
    for (const auto& src : config.features) {
      features.push_back(load_features(src.path, src.format, src.name, CsvOptions{src.header}));
    }
  });
  const LabelVector labels = in_stage("load", [&] { return load_labels(config.labels); });
  return run_pipeline(config, features, labels);
}

PipelineResult run_pipeline(const PipelineConfig& config, const std::vector<FeatureMatrix>& features,
                            const LabelVector& labels) {
  in_stage("config", [&] { config.validate(); });
  if (features.empty()) throw Error(ErrorCode::InvalidConfig, "no modalities");
  const std::size_t n = features.front().samples();
  in_stage("load", [&] {
    std::set<std::string> names;
    for (const auto& f : features) {
      if (f.samples() != n) {
        throw Error(ErrorCode::LengthMismatch,
                    "modality '" + f.modality() + "' has " + std::to_string(f.samples()) +
                        " samples, expected " + std::to_string(n));
      }
      if (!names.insert(f.modality()).second) {
        throw Error(ErrorCode::InvalidConfig, "duplicate modality name '" + f.modality() + "'");
      }
    }
    labels.require_length(n);
  });

  SplitSpec split_spec = config.split;
  split_spec.seed = derive_seed(config.seed, "splits");
  const auto splits = in_stage("split", [&] { return make_splits(labels, split_spec); });

  auto evaluate = [&](const Matrix& points, Metric metric) {
    return in_stage("classify", [&] {
      std::vector<double> acc;
      acc.reserve(splits.size());
      for (const auto& s : splits) {
        acc.push_back(knn_classify(points, labels, s.train, s.test, metric, config.votes));
      }
      return acc;
    });
  };

  PipelineResult result;
  if (config.baselines) {
    for (const auto& f : features) {
      result.table.rows.push_back(
          make_row(f.modality(), 0, f.dims(), evaluate(f.values(), config.feature_eval_metric)));
    }
    const Matrix joint = in_stage("joint", [&] { return concat_zscore(features); });
    result.table.rows.push_back(
        make_row("joint", 0, joint.cols(), evaluate(joint, config.feature_eval_metric)));
  }

  if (!config.out_dir.empty()) {
    in_stage("output", [&] {
      std::error_code ec;
      std::filesystem::create_directories(config.out_dir, ec);
      if (ec) throw Error(ErrorCode::IoError, "cannot create " + config.out_dir.string());
    });
  }

  json cells = json::array();
  for (std::size_t k : config.k_values) {
    const AffinityMatrix affinity = build_fused_affinity(features, k, config);
    const SamplerTable samplers = in_stage("samplers", [&] {
      return build_samplers(affinity, config.noise_power, derive_seed(config.seed, "sampler", k));
    });
    for (std::size_t d : config.d_values) {
      TrainConfig tc = config.train;
      tc.dim = d;
      tc.seed = derive_seed(derive_seed(config.seed, "train", k), "dim", d);
      const TrainResult trained = in_stage("embed", [&] { return train(affinity, samplers, tc); });
      result.table.rows.push_back(
          make_row("fgf", k, d, evaluate(trained.embeddings.vectors(), config.embedding_eval_metric)));
      json cell = {{"k", k},
                   {"d", d},
                   {"train_seed", tc.seed},
                   {"final_loss", trained.report.epoch_loss.empty() ? 0.0 : trained.report.epoch_loss.back()},
                   {"positive_pairs", trained.report.positive_pairs}};
      if (!config.out_dir.empty() && config.write_embeddings) {
        const auto file = cell_file(k, d, config.embedding_format);
        in_stage("output", [&] {
          save_embeddings(trained.embeddings, config.out_dir / file, config.embedding_format);
        });
        cell["embeddings"] = file;
      }
      cells.push_back(std::move(cell));
    }
  }

  json modalities = json::array();
  for (const auto& f : features) {
    modalities.push_back({{"name", f.modality()}, {"n", f.samples()}, {"D", f.dims()}});
  }
  result.manifest = {
      {"config", config_to_json(config)},
      {"resolved",
       {{"k1", config.k1 ? "fixed" : "k"},
        {"k2", config.k2 ? "fixed" : "k"},
        {"split_seed", split_spec.seed},
        {"splits", splits.size()},
        {"classes", labels.class_count()},
        {"samples", n}}},
      {"modalities", modalities},
      {"cells", cells},
      {"notes",
       {{"classifier", "k-NN vote classifier (votes=" + std::to_string(config.votes) +
                           ") used in place of a one-vs-rest SVM"},
        {"joint_baseline", "per-column z-score of each modality, then concatenation"},
        {"fgf_training", "negative-sampling SGD with separate target and context matrices; "
                         "target matrix reported"}}},
  };

  if (!config.out_dir.empty()) {
    in_stage("output", [&] {
      write_text(config.out_dir / "results.csv", to_csv(result.table));
      write_text(config.out_dir / "manifest.json", result.manifest.dump(2) + "\n");
      if (config.k_values.size() > 1) {
        write_text(config.out_dir / "sweep_k.csv", sweep_report(result.table, SweepAxis::K));
      }
      if (config.d_values.size() > 1) {
        write_text(config.out_dir / "sweep_d.csv", sweep_report(result.table, SweepAxis::D));
      }
    });
  }
  return result;
}

}  // namespace fgf
