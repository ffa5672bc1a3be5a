#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "fgf/dataset.hpp"
#include "fgf/ejgraph.hpp"
#include "fgf/embed.hpp"
#include "fgf/error.hpp"
#include "fgf/evaluation.hpp"
#include "fgf/fusion.hpp"
#include "fgf/knn.hpp"
#include "fgf/pipeline.hpp"

namespace py = pybind11;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IndexArray = py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>;

PyObject* g_error_type = nullptr;

fgf::Matrix to_matrix(const DoubleArray& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-d array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return fgf::Matrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

py::array_t<double> to_array(const fgf::Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

template <typename T>
py::array_t<T> to_array(const std::vector<T>& v) {
  py::array_t<T> out(v.size());
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<fgf::Index> to_indices(const IndexArray& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-d index array");
  return {a.data(), a.data() + a.size()};
}

std::vector<double> to_vector(const DoubleArray& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-d array");
  return {a.data(), a.data() + a.size()};
}

fgf::LabelVector make_labels(std::vector<std::string> labels,
                             std::optional<std::vector<std::string>> instances) {
  return fgf::LabelVector(std::move(labels), std::move(instances));
}

py::tuple edge_arrays(const std::vector<std::vector<fgf::Edge>>& rows) {
  std::vector<std::uint64_t> src;
  std::vector<std::uint64_t> dst;
  std::vector<double> weight;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& e : rows[i]) {
      src.push_back(i);
      dst.push_back(e.target);
      weight.push_back(e.weight);
    }
  }
  return py::make_tuple(to_array(src), to_array(dst), to_array(weight));
}

fgf::SparseGraph graph_from_edges(std::size_t n, const IndexArray& src, const IndexArray& dst,
                                  const DoubleArray& weight, std::string modality) {
  const auto s = to_indices(src);
  const auto d = to_indices(dst);
  const auto w = to_vector(weight);
  if (s.size() != d.size() || s.size() != w.size()) {
    throw py::value_error("src, dst and weight must have equal length");
  }
  fgf::SparseGraph g(n, std::move(modality));
  for (std::size_t e = 0; e < s.size(); ++e) {
    if (s[e] >= n) throw py::value_error("edge source out of range");
    g.rows[s[e]].push_back({d[e], w[e]});
  }
  g.validate();
  return g;
}

nlohmann::json to_json(const py::handle& obj) {
  const auto dumps = py::module_::import("json").attr("dumps");
  return nlohmann::json::parse(dumps(obj).cast<std::string>());
}

py::object from_json(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::list rows_to_list(const fgf::ResultTable& table) {
  py::list out;
  for (const auto& r : table.rows) {
    py::dict row;
    row["method"] = r.method;
    row["k"] = r.k;
    row["d"] = r.d;
    row["accuracies"] = r.accuracies;
    row["mean"] = r.mean;
    row["std"] = r.std;
    out.append(row);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_fgf, m) {
  m.doc() = "Feature graph fusion: extended Jaccard graphs, fusion and graph embeddings.";

  g_error_type = PyErr_NewException("fgf.FgfError", PyExc_RuntimeError, nullptr);
  m.attr("FgfError") = py::handle(g_error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const fgf::Error& e) {
      py::object type = py::reinterpret_borrow<py::object>(g_error_type);
      py::object inst = type(e.what());
      inst.attr("code") = std::string(fgf::to_string(e.code()));
      inst.attr("exit_status") = fgf::exit_status(e.code());
      PyErr_SetObject(g_error_type, inst.ptr());
    }
  });

  // dataset

  m.def(
      "synth_multimodal",
      [](std::size_t n_classes, std::size_t per_class, double noise, double complementarity,
         std::uint64_t seed) {
        const auto data = fgf::synth_multimodal(n_classes, per_class, noise, complementarity, seed);
        py::dict out;
        out["a"] = to_array(data.modality_a.values());
        out["b"] = to_array(data.modality_b.values());
        out["labels"] = data.labels.labels();
        out["instances"] = data.labels.instance_ids();
        return out;
      },
      py::arg("n_classes"), py::arg("per_class"), py::arg("noise") = 0.15,
      py::arg("complementarity") = 1.0, py::arg("seed") = 0,
      "Two-modality fixture with complementary class structure. Returns a dict with "
      "'a', 'b', 'labels' and 'instances'.");

  m.def(
      "concat_zscore",
      [](const std::vector<DoubleArray>& modalities) {
        std::vector<fgf::FeatureMatrix> fm;
        for (std::size_t i = 0; i < modalities.size(); ++i) {
          fm.emplace_back("m" + std::to_string(i), to_matrix(modalities[i]));
        }
        return to_array(fgf::concat_zscore(fm));
      },
      py::arg("modalities"));

  // knn

  m.def(
      "knn",
      [](const DoubleArray& points, std::size_t k, const std::string& metric, unsigned threads) {
        const fgf::KnnIndex index(fgf::FeatureMatrix("x", to_matrix(points)), fgf::parse_metric(metric));
        const auto lists = index.all_knns(k, threads);
        py::array_t<std::uint64_t> ids({lists.size(), k});
        py::array_t<double> dists({lists.size(), k});
        auto id_view = ids.mutable_unchecked<2>();
        auto dist_view = dists.mutable_unchecked<2>();
        for (std::size_t q = 0; q < lists.size(); ++q) {
          for (std::size_t j = 0; j < k; ++j) {
            id_view(q, j) = lists[q].ids[j];
            dist_view(q, j) = lists[q].distances[j];
          }
        }
        return py::make_tuple(ids, dists);
      },
      py::arg("points"), py::arg("k"), py::arg("metric") = "euclidean", py::arg("threads") = 1,
      "Exact k nearest neighbors of every row, excluding itself. Returns (ids, distances).");

  // ejgraph

  py::class_<fgf::SparseGraph>(m, "Graph")
      .def_readonly("n", &fgf::SparseGraph::n)
      .def_readonly("modality", &fgf::SparseGraph::modality)
      .def_property_readonly("edge_count", &fgf::SparseGraph::edge_count)
      .def("edges", [](const fgf::SparseGraph& g) { return edge_arrays(g.rows); },
           "Edge list as (src, dst, weight) arrays in row order.")
      .def_static("from_edges", &graph_from_edges, py::arg("n"), py::arg("src"), py::arg("dst"),
                  py::arg("weight"), py::arg("modality") = "")
      .def("save", [](const fgf::SparseGraph& g, const std::string& path, const std::string& format) {
             fgf::save_graph(g, path, fgf::parse_file_format(format));
           }, py::arg("path"), py::arg("format") = "csv")
      .def_static("load", [](const std::string& path, const std::string& format) {
             return fgf::load_graph(path, fgf::parse_file_format(format));
           }, py::arg("path"), py::arg("format") = "csv")
      .def("__eq__", [](const fgf::SparseGraph& a, const fgf::SparseGraph& b) { return a == b; })
      .def("__repr__", [](const fgf::SparseGraph& g) {
        return "<Graph n=" + std::to_string(g.n) + " edges=" + std::to_string(g.edge_count()) + ">";
      });

  m.def(
      "jaccard",
      [](const std::vector<fgf::Index>& a, const std::vector<fgf::Index>& b) {
        return fgf::jaccard_sets(a, b);
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "build_ejg",
      [](const DoubleArray& points, std::size_t k, std::size_t k1, std::size_t k2,
         const std::string& weight_mode, const std::string& metric, unsigned threads,
         const std::string& modality) {
        const fgf::KnnIndex index(fgf::FeatureMatrix(modality, to_matrix(points)),
                                  fgf::parse_metric(metric));
        fgf::EjgParams params{k, k1, k2, fgf::parse_weight_mode(weight_mode)};
        return fgf::build_ejg(index, params, threads, modality);
      },
      py::arg("points"), py::arg("k"), py::arg("k1") = 0, py::arg("k2") = 0,
      py::arg("weight_mode") = "jaccard-scaled", py::arg("metric") = "euclidean",
      py::arg("threads") = 1, py::arg("modality") = "",
      "Extended Jaccard graph over the rows of `points`. k1 and k2 default to k.");

  // fusion

  py::class_<fgf::AffinityMatrix>(m, "Affinity")
      .def_readonly("n", &fgf::AffinityMatrix::n)
      .def_property_readonly("sigma_sq",
                             [](const fgf::AffinityMatrix& a) { return to_array(a.sigma_sq); })
      .def("edges", [](const fgf::AffinityMatrix& a) { return edge_arrays(a.rows); })
      .def("row", [](const fgf::AffinityMatrix& a, fgf::Index i) {
             if (i >= a.n) throw py::index_error("row out of range");
             std::vector<std::pair<fgf::Index, double>> out;
             for (const auto& e : a.rows[i]) out.emplace_back(e.target, e.weight);
             return out;
           }, py::arg("i"))
      .def("__repr__", [](const fgf::AffinityMatrix& a) {
        return "<Affinity n=" + std::to_string(a.n) + ">";
      });

  m.def(
      "fuse_graphs",
      [](const std::vector<fgf::SparseGraph>& graphs, const std::string& combine) {
        return fgf::fuse_graphs(graphs, fgf::parse_combine(combine));
      },
      py::arg("graphs"), py::arg("combine") = "sum");

  m.def(
      "normalize_affinity",
      [](const fgf::SparseGraph& g, const std::string& kernel, double sigma_floor) {
        return fgf::normalize_affinity(g, fgf::parse_kernel_input(kernel), sigma_floor);
      },
      py::arg("graph"), py::arg("kernel") = "dissimilarity", py::arg("sigma_floor") = fgf::kSigmaFloor);

  py::class_<fgf::SamplerTable>(m, "Samplers")
      .def_property_readonly("seed", &fgf::SamplerTable::seed)
      .def_property_readonly("noise_power", &fgf::SamplerTable::noise_power)
      .def_property_readonly("noise_distribution",
                             [](const fgf::SamplerTable& s) { return to_array(s.noise_distribution()); })
      .def("sample_context", [](const fgf::SamplerTable& s, fgf::Index node, std::size_t count,
                                std::uint64_t stream) {
             if (node >= s.size()) throw py::index_error("node out of range");
             auto rng = s.stream(stream);
             std::vector<std::uint64_t> out(count);
             for (auto& v : out) v = s.sample_context(node, rng);
             return to_array(out);
           }, py::arg("node"), py::arg("count"), py::arg("stream") = 0)
      .def("sample_noise", [](const fgf::SamplerTable& s, std::size_t count, std::uint64_t stream) {
             auto rng = s.stream(stream);
             std::vector<std::uint64_t> out(count);
             for (auto& v : out) v = s.sample_noise(rng);
             return to_array(out);
           }, py::arg("count"), py::arg("stream") = 0);

  m.def("build_samplers", &fgf::build_samplers, py::arg("affinity"), py::arg("noise_power") = 0.75,
        py::arg("seed") = 0);

  // embed

  m.def(
      "sgd_step",
      [](const DoubleArray& f, const DoubleArray& g, bool positive, double lr) {
        auto fv = to_vector(f);
        auto gv = to_vector(g);
        if (fv.size() != gv.size()) throw py::value_error("f and g differ in length");
        const double loss = fgf::sgd_step(fv, gv, positive, lr);
        return py::make_tuple(to_array(fv), to_array(gv), loss);
      },
      py::arg("f"), py::arg("g"), py::arg("positive"), py::arg("lr"),
      "One ascent step on a (target, context) pair. Returns (f, g, loss).");

  m.def(
      "train",
      [](const fgf::AffinityMatrix& affinity, const fgf::SamplerTable& samplers, std::size_t dim,
         std::size_t samples_per_node, std::size_t negatives, std::size_t epochs, double lr,
         double lr_end, std::uint64_t seed, double init_scale, unsigned threads) {
        fgf::TrainConfig cfg;
        cfg.dim = dim;
        cfg.samples_per_node = samples_per_node;
        cfg.negatives = negatives;
        cfg.epochs = epochs;
        cfg.lr_start = lr;
        cfg.lr_end = lr_end;
        cfg.seed = seed;
        cfg.init_scale = init_scale;
        cfg.threads = threads;
        fgf::TrainResult result = [&] {
          py::gil_scoped_release release;
          return fgf::train(affinity, samplers, cfg);
        }();
        py::dict report;
        report["epoch_loss"] = result.report.epoch_loss;
        report["positive_pairs"] = result.report.positive_pairs;
        report["seconds"] = result.report.seconds;
        return py::make_tuple(to_array(result.embeddings.vectors()), to_array(result.context), report);
      },
      py::arg("affinity"), py::arg("samplers"), py::arg("dim") = 100, py::arg("samples_per_node") = 100,
      py::arg("negatives") = 5, py::arg("epochs") = 50, py::arg("lr") = 0.025, py::arg("lr_end") = 1e-4,
      py::arg("seed") = 1, py::arg("init_scale") = 1.0, py::arg("threads") = 1,
      "Negative-sampling SGD. Returns (embeddings, context, report).");

  m.def(
      "surrogate_loss",
      [](const DoubleArray& target, const DoubleArray& context, const fgf::SamplerTable& samplers,
         std::size_t sample_count, std::size_t negatives, std::uint64_t seed) {
        const auto est = fgf::estimate_surrogate_loss(to_matrix(target), to_matrix(context), samplers,
                                                      sample_count, negatives, seed);
        return py::make_tuple(est.mean, est.standard_error);
      },
      py::arg("target"), py::arg("context"), py::arg("samplers"), py::arg("sample_count") = 10000,
      py::arg("negatives") = 5, py::arg("seed") = 0, "Returns (mean, standard_error).");

  // evaluation

  m.def(
      "make_splits",
      [](std::vector<std::string> labels, const std::string& protocol, std::size_t m_train,
         double fraction, std::size_t repeats, std::uint64_t seed,
         std::optional<std::vector<std::string>> instances) {
        fgf::SplitSpec spec;
        spec.protocol = fgf::parse_split_protocol(protocol);
        spec.m = m_train;
        spec.fraction = fraction;
        spec.repeats = repeats;
        spec.seed = seed;
        const auto splits = fgf::make_splits(make_labels(std::move(labels), std::move(instances)), spec);
        py::list out;
        for (const auto& s : splits) {
          out.append(py::make_tuple(to_array<std::uint64_t>({s.train.begin(), s.train.end()}),
                                    to_array<std::uint64_t>({s.test.begin(), s.test.end()})));
        }
        return out;
      },
      py::arg("labels"), py::arg("protocol") = "per_class_train_m", py::arg("m") = 3,
      py::arg("fraction") = 0.5, py::arg("repeats") = 10, py::arg("seed") = 0,
      py::arg("instances") = py::none(), "List of (train, test) index arrays.");

  m.def(
      "knn_classify",
      [](const DoubleArray& points, std::vector<std::string> labels, const IndexArray& train,
         const IndexArray& test, const std::string& metric, std::size_t votes) {
        return fgf::knn_classify(to_matrix(points), make_labels(std::move(labels), std::nullopt),
                                 to_indices(train), to_indices(test), fgf::parse_metric(metric), votes);
      },
      py::arg("points"), py::arg("labels"), py::arg("train"), py::arg("test"),
      py::arg("metric") = "euclidean", py::arg("votes") = 1);

  m.def(
      "run_pipeline",
      [](const py::dict& config, std::optional<std::vector<DoubleArray>> features,
         std::optional<std::vector<std::string>> labels,
         std::optional<std::vector<std::string>> instances,
         std::optional<std::vector<std::string>> names) {
        const fgf::PipelineConfig cfg = fgf::config_from_json(to_json(config));
        fgf::PipelineResult result;
        if (features) {
          if (!labels) throw py::value_error("labels are required with in-memory features");
          std::vector<fgf::FeatureMatrix> fm;
          for (std::size_t i = 0; i < features->size(); ++i) {
            std::string name = names && i < names->size() ? (*names)[i] : "m" + std::to_string(i);
            fm.emplace_back(std::move(name), to_matrix((*features)[i]));
          }
          const auto lv = make_labels(std::move(*labels), std::move(instances));
          py::gil_scoped_release release;
          result = fgf::run_pipeline(cfg, fm, lv);
        } else {
          py::gil_scoped_release release;
          result = fgf::run_pipeline(cfg);
        }
        return py::make_tuple(rows_to_list(result.table), from_json(result.manifest),
                              fgf::to_csv(result.table));
      },
      py::arg("config"), py::arg("features") = py::none(), py::arg("labels") = py::none(),
      py::arg("instances") = py::none(), py::arg("names") = py::none(),
      "Full pipeline from a config dict (same keys as the JSON config file). Features and labels "
      "are read from the configured files unless given in memory. Returns (rows, manifest, csv).");

  m.def(
      "sweep_report",
      [](const std::string& results_csv, const std::string& axis) {
        return fgf::sweep_report(fgf::parse_results_csv(results_csv), fgf::parse_sweep_axis(axis));
      },
      py::arg("results_csv"), py::arg("axis"));
}
