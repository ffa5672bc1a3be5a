// fgf: command-line driver for graph construction, fusion, embedding
// training and evaluation.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fgf/dataset.hpp"
#include "fgf/ejgraph.hpp"
#include "fgf/embed.hpp"
#include "fgf/error.hpp"
#include "fgf/evaluation.hpp"
#include "fgf/fusion.hpp"
#include "fgf/pipeline.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw fgf::Error(fgf::ErrorCode::IoError, "cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw fgf::Error(fgf::ErrorCode::FileNotFound, path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Explicit format flag wins; otherwise ".bin" means binary and anything else CSV.
fgf::FileFormat resolve_format(const std::string& flag, const fs::path& path) {
  if (!flag.empty()) return fgf::parse_file_format(flag);
  return path.extension() == ".bin" ? fgf::FileFormat::Binary : fgf::FileFormat::Csv;
}

fs::path sidecar(const fs::path& affinity) { return fs::path(affinity.string() + ".json"); }

struct SynthArgs {
  std::size_t classes = 10;
  std::size_t per_class = 20;
  double noise = 0.15;
  double complementarity = 1.0;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string format = "csv";
};

void run_synth(const SynthArgs& a) {
  const auto data = fgf::synth_multimodal(a.classes, a.per_class, a.noise, a.complementarity, a.seed);
  const auto format = fgf::parse_file_format(a.format);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  const std::string ext = format == fgf::FileFormat::Csv ? ".csv" : ".bin";
  fgf::save_features(data.modality_a, dir / ("modality_a" + ext), format);
  fgf::save_features(data.modality_b, dir / ("modality_b" + ext), format);
  fgf::save_labels(data.labels, dir / "labels.csv");
  std::cout << "wrote " << data.labels.size() << " samples to " << dir.string() << "\n";
}

struct GraphArgs {
  std::string features;
  std::string format;
  bool header = false;
  std::string modality;
  std::string metric = "euclidean";
  std::size_t k = 10;
  std::size_t k1 = 0;
  std::size_t k2 = 0;
  std::string weight_mode = "jaccard-scaled";
  unsigned threads = 1;
  std::string out;
  std::string out_format;
};

void run_build_graph(const GraphArgs& a) {
  const auto features = fgf::load_features(a.features, resolve_format(a.format, a.features), a.modality,
                                           fgf::CsvOptions{a.header});
  const fgf::KnnIndex index(features, fgf::parse_metric(a.metric));
  fgf::EjgParams params;
  params.k = a.k;
  params.k1 = a.k1;
  params.k2 = a.k2;
  params.mode = fgf::parse_weight_mode(a.weight_mode);
  const auto graph = fgf::build_ejg(index, params, a.threads, features.modality());
  fgf::save_graph(graph, a.out, resolve_format(a.out_format, a.out));
  std::cout << "graph '" << graph.modality << "': " << graph.n << " nodes, " << graph.edge_count()
            << " edges\n";
}

struct FuseArgs {
  std::vector<std::string> graphs;
  std::string graph_format;
  std::string combine = "sum";
  std::string kernel = "dissimilarity";
  double sigma_floor = fgf::kSigmaFloor;
  double noise_power = 0.75;
  std::string out;
  std::string out_format;
};

void run_fuse(const FuseArgs& a) {
  if (!(a.noise_power >= 0.0)) throw fgf::Error(fgf::ErrorCode::InvalidConfig, "noise power must be >= 0");
  std::vector<fgf::SparseGraph> graphs;
  for (const auto& path : a.graphs) {
    graphs.push_back(fgf::load_graph(path, resolve_format(a.graph_format, path)));
  }
  const auto combine = fgf::parse_combine(a.combine);
  const auto kernel = fgf::parse_kernel_input(a.kernel);
  const auto fused = fgf::fuse_graphs(graphs, combine);
  const auto affinity = fgf::normalize_affinity(fused, kernel, a.sigma_floor);
  fgf::save_affinity(affinity, a.out, resolve_format(a.out_format, a.out));
  const json meta = {{"combine", fgf::to_string(combine)},
                     {"kernel", fgf::to_string(kernel)},
                     {"sigma_floor", a.sigma_floor},
                     {"noise_power", a.noise_power},
                     {"n", affinity.n},
                     {"graphs", a.graphs},
                     {"sigma_sq", affinity.sigma_sq}};
  write_text(sidecar(a.out), meta.dump(2) + "\n");
  std::cout << "affinity: " << affinity.n << " nodes, " << fused.edge_count() << " edges\n";
}

struct EmbedArgs {
  std::string affinity;
  std::string format;
  fgf::TrainConfig train;
  std::optional<double> noise_power;
  std::string out;
  std::string out_format;
  std::string report;
};

void run_embed(const EmbedArgs& a) {
  const auto affinity = fgf::load_affinity(a.affinity, resolve_format(a.format, a.affinity));
  double noise_power = 0.75;
  if (a.noise_power) {
    noise_power = *a.noise_power;
  } else if (fs::exists(sidecar(a.affinity))) {
    const json meta = json::parse(read_text(sidecar(a.affinity)));
    noise_power = meta.value("noise_power", 0.75);
  }
  const auto samplers =
      fgf::build_samplers(affinity, noise_power, fgf::derive_seed(a.train.seed, "sampler"));
  const auto result = fgf::train(affinity, samplers, a.train);
  fgf::save_embeddings(result.embeddings, a.out, resolve_format(a.out_format, a.out));
  const json report = {{"epoch_loss", result.report.epoch_loss},
                       {"positive_pairs", result.report.positive_pairs},
                       {"seconds", result.report.seconds},
                       {"dim", a.train.dim},
                       {"samples_per_node", a.train.samples_per_node},
                       {"negatives", a.train.negatives},
                       {"epochs", a.train.epochs},
                       {"lr", a.train.lr_start},
                       {"lr_end", a.train.lr_end},
                       {"init_scale", a.train.init_scale},
                       {"seed", a.train.seed},
                       {"threads", a.train.threads},
                       {"noise_power", noise_power}};
  write_text(a.report.empty() ? fs::path(a.out + ".report.json") : fs::path(a.report),
             report.dump(2) + "\n");
  std::cout << "embeddings: " << result.embeddings.samples() << " x " << result.embeddings.dims()
            << ", final loss "
            << (result.report.epoch_loss.empty() ? 0.0 : result.report.epoch_loss.back()) << "\n";
}

struct EvalArgs {
  std::vector<std::string> features;
  std::string embeddings;
  std::string format;
  bool header = false;
  std::string labels;
  std::string protocol = "per_class_train_m";
  std::size_t m = 3;
  double fraction = 0.5;
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
  std::string metric = "euclidean";
  std::size_t votes = 1;
  std::string method;
  std::string out;
};

void run_eval(const EvalArgs& a) {
  fgf::Matrix points;
  std::string method = a.method;
  if (!a.embeddings.empty()) {
    if (!a.features.empty()) {
      throw fgf::Error(fgf::ErrorCode::InvalidConfig, "give either --features or --embeddings");
    }
    points = fgf::load_embeddings(a.embeddings, resolve_format(a.format, a.embeddings)).vectors();
    if (method.empty()) method = "embedding";
  } else if (a.features.size() == 1) {
    points = fgf::load_features(a.features.front(), resolve_format(a.format, a.features.front()), {}, fgf::CsvOptions{a.header}).values();
    if (method.empty()) method = fs::path(a.features.front()).stem().string();
  } else if (a.features.size() > 1) {
    std::vector<fgf::FeatureMatrix> mods;
    for (const auto& f : a.features) {
      mods.push_back(fgf::load_features(f, resolve_format(a.format, f), {}, fgf::CsvOptions{a.header}));
    }
    points = fgf::concat_zscore(mods);
    if (method.empty()) method = "joint";
  } else {
    throw fgf::Error(fgf::ErrorCode::InvalidConfig, "no --features or --embeddings given");
  }
  const auto labels = fgf::load_labels(a.labels);
  labels.require_length(points.rows());
  fgf::SplitSpec spec;
  spec.protocol = fgf::parse_split_protocol(a.protocol);
  spec.m = a.m;
  spec.fraction = a.fraction;
  spec.repeats = a.repeats;
  spec.seed = a.seed;
  const auto metric = fgf::parse_metric(a.metric);
  std::vector<double> acc;
  for (const auto& s : fgf::make_splits(labels, spec)) {
    acc.push_back(fgf::knn_classify(points, labels, s.train, s.test, metric, a.votes));
  }
  fgf::ResultTable table;
  table.rows.push_back(fgf::make_row(method, 0, points.cols(), std::move(acc)));
  const std::string csv = fgf::to_csv(table);
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    write_text(a.out, csv);
  }
}

void run_sweep(const std::string& results, const std::string& axis, const std::string& out) {
  const auto table = fgf::parse_results_csv(read_text(results));
  const auto report = fgf::sweep_report(table, fgf::parse_sweep_axis(axis));
  if (out.empty()) {
    std::cout << report;
  } else {
    write_text(out, report);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature graph fusion: Extended Jaccard Graphs, graph union and embedding training"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic two-modality fixture");
  synth_cmd->add_option("--classes", synth.classes, "Number of classes")->capture_default_str();
  synth_cmd->add_option("--per-class", synth.per_class, "Samples per class")->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise, "Gaussian noise standard deviation")->capture_default_str();
  synth_cmd->add_option("--complementarity", synth.complementarity, "Degree in [0,1]")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--out-dir", synth.out_dir)->capture_default_str();
  synth_cmd->add_option("--format", synth.format, "csv or binary")->capture_default_str();

  GraphArgs graph;
  auto* graph_cmd = app.add_subcommand("build-graph", "Build an Extended Jaccard Graph for one modality");
  graph_cmd->add_option("--features", graph.features, "Feature file")->required();
  graph_cmd->add_option("--format", graph.format, "csv or binary (default: from extension)");
  graph_cmd->add_flag("--header", graph.header, "Skip the first CSV line");
  graph_cmd->add_option("--modality", graph.modality, "Modality name (default: file stem)");
  graph_cmd->add_option("--metric", graph.metric, "euclidean or cosine")->capture_default_str();
  graph_cmd->add_option("--k", graph.k)->capture_default_str();
  graph_cmd->add_option("--k1", graph.k1, "Second-level list size (0: k)")->capture_default_str();
  graph_cmd->add_option("--k2", graph.k2, "Third-level list size (0: k)")->capture_default_str();
  graph_cmd->add_option("--weight-mode", graph.weight_mode, "jaccard-scaled or literal")->capture_default_str();
  graph_cmd->add_option("--threads", graph.threads)->capture_default_str();
  graph_cmd->add_option("--out", graph.out, "Output graph file")->required();
  graph_cmd->add_option("--out-format", graph.out_format, "csv or binary (default: from extension)");

  FuseArgs fuse;
  auto* fuse_cmd = app.add_subcommand("fuse", "Fuse graphs and normalize into a row-stochastic affinity");
  fuse_cmd->add_option("--graph", fuse.graphs, "Graph files (two or more)")->required()->expected(2, -1);
  fuse_cmd->add_option("--graph-format", fuse.graph_format, "csv or binary (default: from extension)");
  fuse_cmd->add_option("--combine", fuse.combine, "sum or max")->capture_default_str();
  fuse_cmd->add_option("--kernel", fuse.kernel, "dissimilarity or literal")->capture_default_str();
  fuse_cmd->add_option("--sigma-floor", fuse.sigma_floor)->capture_default_str();
  fuse_cmd->add_option("--noise-power", fuse.noise_power, "Negative-sampling exponent")->capture_default_str();
  fuse_cmd->add_option("--out", fuse.out, "Output affinity file")->required();
  fuse_cmd->add_option("--out-format", fuse.out_format, "csv or binary (default: from extension)");

  EmbedArgs embed;
  auto* embed_cmd = app.add_subcommand("embed", "Train fused embeddings on an affinity");
  embed_cmd->add_option("--affinity", embed.affinity, "Affinity file")->required();
  embed_cmd->add_option("--format", embed.format, "csv or binary (default: from extension)");
  embed_cmd->add_option("--dim", embed.train.dim)->capture_default_str();
  embed_cmd->add_option("--samples-per-node", embed.train.samples_per_node)->capture_default_str();
  embed_cmd->add_option("--negatives", embed.train.negatives)->capture_default_str();
  embed_cmd->add_option("--epochs", embed.train.epochs)->capture_default_str();
  embed_cmd->add_option("--lr", embed.train.lr_start, "Initial learning rate")->capture_default_str();
  embed_cmd->add_option("--lr-end", embed.train.lr_end, "Final learning rate")->capture_default_str();
  embed_cmd->add_option("--init-scale", embed.train.init_scale)->capture_default_str();
  embed_cmd->add_option("--seed", embed.train.seed)->capture_default_str();
  embed_cmd->add_option("--threads", embed.train.threads)->capture_default_str();
  embed_cmd->add_option("--noise-power", embed.noise_power, "Overrides the value recorded by fuse");
  embed_cmd->add_option("--out", embed.out, "Output embeddings file")->required();
  embed_cmd->add_option("--out-format", embed.out_format, "csv or binary (default: from extension)");
  embed_cmd->add_option("--report", embed.report, "TrainReport JSON (default: <out>.report.json)");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Split-and-classify evaluation of one feature space");
  eval_cmd->add_option("--features", eval.features, "Feature files (several are z-scored and concatenated)");
  eval_cmd->add_option("--embeddings", eval.embeddings, "Embeddings file");
  eval_cmd->add_option("--format", eval.format, "csv or binary (default: from extension)");
  eval_cmd->add_flag("--header", eval.header);
  eval_cmd->add_option("--labels", eval.labels)->required();
  eval_cmd->add_option("--protocol", eval.protocol,
                       "per_class_train_m, leave_instance_out or random_fraction")->capture_default_str();
  eval_cmd->add_option("--m", eval.m)->capture_default_str();
  eval_cmd->add_option("--fraction", eval.fraction)->capture_default_str();
  eval_cmd->add_option("--repeats", eval.repeats)->capture_default_str();
  eval_cmd->add_option("--seed", eval.seed)->capture_default_str();
  eval_cmd->add_option("--metric", eval.metric)->capture_default_str();
  eval_cmd->add_option("--votes", eval.votes)->capture_default_str();
  eval_cmd->add_option("--method", eval.method, "Row label");
  eval_cmd->add_option("--out", eval.out, "results CSV (default: stdout)");

  std::string config_path;
  std::vector<std::string> pl_features;
  std::string pl_labels;
  std::vector<std::size_t> pl_k;
  std::vector<std::size_t> pl_d;
  std::size_t pl_k1 = 0, pl_k2 = 0, pl_spn = 0, pl_neg = 0, pl_epochs = 0, pl_m = 0, pl_repeats = 0, pl_votes = 0;
  unsigned pl_threads = 1;
  double pl_lr = 0, pl_lr_end = 0, pl_noise_power = 0, pl_fraction = 0, pl_init_scale = 0, pl_sigma_floor = 0;
  std::uint64_t pl_seed = 0;
  std::string pl_metric, pl_weight_mode, pl_combine, pl_kernel, pl_protocol, pl_out_dir, pl_eval_metric,
      pl_emb_eval_metric, pl_emb_format;
  auto* pl = app.add_subcommand("pipeline", "Run baselines and the FGF sweep; write results.csv and manifest.json");
  pl->add_option("--config", config_path, "PipelineConfig JSON file");
  // every flag below overrides the JSON key of the same name (dashes -> underscores)
  std::vector<std::pair<CLI::Option*, std::function<void(json&)>>> overrides = {
      {pl->add_option("--features", pl_features), [&](json& j) { j["features"] = pl_features; }},
      {pl->add_option("--labels", pl_labels), [&](json& j) { j["labels"] = pl_labels; }},
      {pl->add_option("--k", pl_k, "k values (sweep)"), [&](json& j) { j["k"] = pl_k; }},
      {pl->add_option("--d", pl_d, "embedding dimensions (sweep)"), [&](json& j) { j["d"] = pl_d; }},
      {pl->add_option("--k1", pl_k1), [&](json& j) { j["k1"] = pl_k1; }},
      {pl->add_option("--k2", pl_k2), [&](json& j) { j["k2"] = pl_k2; }},
      {pl->add_option("--metric", pl_metric), [&](json& j) { j["metric"] = pl_metric; }},
      {pl->add_option("--weight-mode", pl_weight_mode), [&](json& j) { j["weight_mode"] = pl_weight_mode; }},
      {pl->add_option("--combine", pl_combine), [&](json& j) { j["combine"] = pl_combine; }},
      {pl->add_option("--kernel", pl_kernel), [&](json& j) { j["kernel"] = pl_kernel; }},
      {pl->add_option("--sigma-floor", pl_sigma_floor), [&](json& j) { j["sigma_floor"] = pl_sigma_floor; }},
      {pl->add_option("--noise-power", pl_noise_power), [&](json& j) { j["noise_power"] = pl_noise_power; }},
      {pl->add_option("--samples-per-node", pl_spn), [&](json& j) { j["samples_per_node"] = pl_spn; }},
      {pl->add_option("--negatives", pl_neg), [&](json& j) { j["negatives"] = pl_neg; }},
      {pl->add_option("--epochs", pl_epochs), [&](json& j) { j["epochs"] = pl_epochs; }},
      {pl->add_option("--lr", pl_lr), [&](json& j) { j["lr"] = pl_lr; }},
      {pl->add_option("--lr-end", pl_lr_end), [&](json& j) { j["lr_end"] = pl_lr_end; }},
      {pl->add_option("--init-scale", pl_init_scale), [&](json& j) { j["init_scale"] = pl_init_scale; }},
      {pl->add_option("--threads", pl_threads), [&](json& j) { j["threads"] = pl_threads; }},
      {pl->add_option("--eval-metric", pl_eval_metric), [&](json& j) { j["eval_metric"] = pl_eval_metric; }},
      {pl->add_option("--embedding-eval-metric", pl_emb_eval_metric),
       [&](json& j) { j["embedding_eval_metric"] = pl_emb_eval_metric; }},
      {pl->add_option("--votes", pl_votes), [&](json& j) { j["votes"] = pl_votes; }},
      {pl->add_option("--protocol", pl_protocol), [&](json& j) { j["protocol"] = pl_protocol; }},
      {pl->add_option("--m", pl_m), [&](json& j) { j["m"] = pl_m; }},
      {pl->add_option("--fraction", pl_fraction), [&](json& j) { j["fraction"] = pl_fraction; }},
      {pl->add_option("--repeats", pl_repeats), [&](json& j) { j["repeats"] = pl_repeats; }},
      {pl->add_option("--seed", pl_seed), [&](json& j) { j["seed"] = pl_seed; }},
      {pl->add_option("--out-dir", pl_out_dir), [&](json& j) { j["out_dir"] = pl_out_dir; }},
      {pl->add_option("--embedding-format", pl_emb_format),
       [&](json& j) { j["embedding_format"] = pl_emb_format; }},
  };

  std::string sweep_results, sweep_axis = "k", sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "Summarize sensitivity of FGF rows along k or d");
  sweep_cmd->add_option("--results", sweep_results, "results.csv from pipeline")->required();
  sweep_cmd->add_option("--axis", sweep_axis, "k or d")->capture_default_str();
  sweep_cmd->add_option("--out", sweep_out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*synth_cmd) run_synth(synth);
    if (*graph_cmd) run_build_graph(graph);
    if (*fuse_cmd) run_fuse(fuse);
    if (*embed_cmd) run_embed(embed);
    if (*eval_cmd) run_eval(eval);
    if (*sweep_cmd) run_sweep(sweep_results, sweep_axis, sweep_out);
    if (*pl) {
      json j = json::object();
      if (!config_path.empty()) {
        try {
          j = json::parse(read_text(config_path));
        } catch (const json::parse_error& e) {
          throw fgf::Error(fgf::ErrorCode::InvalidConfig, config_path + ": " + e.what());
        }
      }
      for (auto& [opt, apply] : overrides) {
        if (opt->count() > 0) apply(j);
      }
      const auto config = fgf::config_from_json(j);
      const auto result = fgf::run_pipeline(config);
      if (config.out_dir.empty()) std::cout << fgf::to_csv(result.table);
      else std::cout << "wrote " << (config.out_dir / "results.csv").string() << "\n";
    }
  } catch (const fgf::Error& e) {
    std::cerr << "fgf: " << e.what() << "\n";
    return fgf::exit_status(e.code());
  } catch (const std::exception& e) {
    std::cerr << "fgf: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
