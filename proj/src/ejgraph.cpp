#include "fgf/ejgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fgf/error.hpp"
#include "fgf/io_util.hpp"
#include "fgf/parallel.hpp"

namespace fgf {

namespace {

constexpr std::uint32_t kGraphVersion = 1;

std::vector<Index> as_set(std::span<const Index> ids) {
  std::vector<Index> v(ids.begin(), ids.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool contains(std::span<const Index> ids, Index id) {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

}  // namespace

std::size_t SparseGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& row : rows) total += row.size();
  return total;
}

void SparseGraph::validate() const {
  if (rows.size() != n) throw Error(ErrorCode::InvalidConfig, "graph row count differs from n");
  std::vector<Index> seen;
  for (Index i = 0; i < n; ++i) {
    seen.clear();
    for (const Edge& e : rows[i]) {
      if (e.target >= n) throw Error(ErrorCode::InvalidConfig, "edge target out of range");
      if (e.target == i) {
        throw Error(ErrorCode::InvalidConfig, "self-loop at node " + std::to_string(i));
      }
      if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
        throw Error(ErrorCode::InvalidConfig, "invalid weight in row " + std::to_string(i));
      }
      seen.push_back(e.target);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
      throw Error(ErrorCode::InvalidConfig, "duplicate edge in row " + std::to_string(i));
    }
  }
}

WeightMode parse_weight_mode(const std::string& name) {
  if (name == "literal") return WeightMode::Literal;
  if (name == "jaccard-scaled") return WeightMode::JaccardScaled;
  throw Error(ErrorCode::InvalidConfig, "unknown weight mode '" + name + "'");
}

std::string to_string(WeightMode mode) {
  return mode == WeightMode::Literal ? "literal" : "jaccard-scaled";
}

double jaccard_sets(std::span<const Index> a, std::span<const Index> b) {
  const auto sa = as_set(a);
  const auto sb = as_set(b);
  if (sa.empty() && sb.empty()) throw Error(ErrorCode::BothEmpty, "jaccard of two empty sets");
  std::size_t inter = 0;
  auto ia = sa.begin();
  auto ib = sb.begin();
  while (ia != sa.end() && ib != sb.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = sa.size() + sb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

int outlier_indicator(Index /*center*/, Index second_level, std::span<const Index> first_level_knn,
                      std::span<const Index> second_level_knn) {
  if (!contains(first_level_knn, second_level)) return 0;
  if (first_level_knn.empty() && second_level_knn.empty()) return 0;
  return jaccard_sets(first_level_knn, second_level_knn) > 0.0 ? 1 : 0;
}

NeighborTable NeighborTable::from_lists(const std::vector<NeighborList>& lists) {
  std::vector<std::vector<Index>> rows(lists.size());
  for (std::size_t i = 0; i < lists.size(); ++i) rows[lists[i].query] = lists[i].ids;
  return NeighborTable(std::move(rows));
}

std::span<const Index> NeighborTable::top(Index id, std::size_t k) const {
  if (id >= rows_.size() || rows_[id].size() < k) {
    throw Error(ErrorCode::ContextIncomplete,
                "no " + std::to_string(k) + "-neighbor list for sample " + std::to_string(id));
  }
  return std::span<const Index>(rows_[id]).first(k);
}

double edge_weight(Index neighbor, Index q, const NeighborTable& context, const EjgParams& params) {
  const std::size_t k1 = params.resolved_k1();
  const std::size_t k2 = params.resolved_k2();
  const auto query_knn = context.top(q, params.k);
  if (!contains(query_knn, neighbor)) {
    throw Error(ErrorCode::InvalidConfig, "sample " + std::to_string(neighbor) +
                                              " is not among the neighbors of " + std::to_string(q));
  }
  const auto neighbor_knn = context.top(neighbor, k1);
  int confirmed = 0;
  for (Index second : neighbor_knn) {
    confirmed += outlier_indicator(neighbor, second, neighbor_knn, context.top(second, k2));
  }
  if (params.mode == WeightMode::Literal) return static_cast<double>(confirmed);
  return jaccard_sets(neighbor_knn, query_knn) *
         (static_cast<double>(confirmed) / static_cast<double>(k1));
}

SparseGraph build_ejg(const KnnIndex& index, const EjgParams& params, unsigned threads,
                      std::string modality) {
  const std::size_t n = index.size();
  const std::size_t k = params.k;
  const std::size_t k1 = params.resolved_k1();
  const std::size_t k2 = params.resolved_k2();
  const std::size_t depth = std::max({k, k1, k2});
  // Prefixes of the deepest list are the shallower lists since ordering is total.
  const NeighborTable table = NeighborTable::from_lists(index.all_knns(depth, threads));

  // The outlier-indicator count of a node does not depend on the query, so
  // it is computed once per node.
  std::vector<int> confirmed(n, 0);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<char> in_first(n, 0);
    for (Index c = begin; c < end; ++c) {
      const auto first = table.top(c, k1);
      for (Index id : first) in_first[id] = 1;
      int count = 0;
      for (Index second : first) {
        const auto second_knn = table.top(second, k2);
        if (std::any_of(second_knn.begin(), second_knn.end(),
                        [&](Index id) { return in_first[id] != 0; })) {
          ++count;
        }
      }
      confirmed[c] = count;
      for (Index id : first) in_first[id] = 0;
    }
  });

  SparseGraph graph(n, std::move(modality));
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<char> in_query(n, 0);
    for (Index q = begin; q < end; ++q) {
      const auto query_knn = table.top(q, k);
      for (Index id : query_knn) in_query[id] = 1;
      auto& row = graph.rows[q];
      row.reserve(k);
      for (Index c : query_knn) {
        double w = static_cast<double>(confirmed[c]);
        if (params.mode == WeightMode::JaccardScaled) {
          const auto neighbor_knn = table.top(c, k1);
          std::size_t inter = 0;
          for (Index id : neighbor_knn) inter += in_query[id];
          const std::size_t uni = k + k1 - inter;
          const double jac = static_cast<double>(inter) / static_cast<double>(uni);
          w = jac * (static_cast<double>(confirmed[c]) / static_cast<double>(k1));
        }
        row.push_back(Edge{c, w});
      }
      for (Index id : query_knn) in_query[id] = 0;
    }
  });
  return graph;
}

void save_graph(const SparseGraph& g, const std::filesystem::path& path, FileFormat format,
                const char* magic, const char* value_column) {
  std::ofstream out = io::open_output(path, format == FileFormat::Binary);
  if (format == FileFormat::Csv) {
    std::string line = "# n=" + std::to_string(g.n) + "\nsrc,dst," + value_column + "\n";
    out << line;
    for (Index i = 0; i < g.n; ++i) {
      for (const Edge& e : g.rows[i]) {
        line = std::to_string(i) + ',' + std::to_string(e.target) + ',';
        io::append_double(line, e.weight);
        line += '\n';
        out << line;
      }
    }
  } else {
    io::BinaryWriter writer(out);
    writer.magic(magic);
    writer.u32(kGraphVersion);
    writer.u64(g.n);
    writer.u64(g.edge_count());
    for (Index i = 0; i < g.n; ++i) {
      for (const Edge& e : g.rows[i]) {
        writer.u64(i);
        writer.u64(e.target);
        writer.f64(e.weight);
      }
    }
  }
  io::finish_output(out, path);
}

SparseGraph load_graph(const std::filesystem::path& path, FileFormat format, const char* magic) {
  SparseGraph g;
  auto add = [&](std::uint64_t src, std::uint64_t dst, double w, const std::string& where) {
    if (src >= g.n || dst >= g.n) {
      throw Error(ErrorCode::ParseError, where + ": node id out of range for n=" +
                                             std::to_string(g.n));
    }
    g.rows[src].push_back(Edge{dst, w});
  };
  if (format == FileFormat::Binary) {
    std::ifstream in = io::open_input(path, std::ios::binary);
    io::BinaryReader reader(in, path);
    reader.expect_magic(magic);
    const auto version = reader.u32();
    if (version != kGraphVersion) {
      throw Error(ErrorCode::ParseError, path.string() + ": unsupported version " +
                                             std::to_string(version));
    }
    const auto n = reader.u64();
    const auto nnz = reader.u64();
    if (nnz > (std::uint64_t{1} << 40)) throw Error(ErrorCode::ParseError, "edge count too large");
    reader.require_remaining(nnz * 24);
    g = SparseGraph(n);
    for (std::uint64_t e = 0; e < nnz; ++e) {
      const auto src = reader.u64();
      const auto dst = reader.u64();
      const double w = reader.f64();
      add(src, dst, w, path.string() + " edge " + std::to_string(e));
    }
  } else {
    std::ifstream in = io::open_input(path);
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string_view> fields;
    bool sized = false;
    std::vector<std::tuple<std::uint64_t, std::uint64_t, double>> edges;
    while (std::getline(in, line)) {
      ++line_no;
      std::string_view view = io::trim(line);
      if (view.empty()) continue;
      if (view.front() == '#') {
        view.remove_prefix(1);
        view = io::trim(view);
        if (view.starts_with("n=")) {
          const auto n = io::parse_u64(view.substr(2));
          if (!n) throw Error(ErrorCode::ParseError, path.string() + ": bad node count");
          g = SparseGraph(*n);
          sized = true;
        }
        continue;
      }
      if (view.starts_with("src")) continue;
      io::split_fields(view, fields);
      const std::string where = path.string() + " line " + std::to_string(line_no);
      if (fields.size() != 3) throw Error(ErrorCode::ParseError, where + ": expected src,dst,value");
      const auto src = io::parse_u64(fields[0]);
      const auto dst = io::parse_u64(fields[1]);
      const auto w = io::parse_double(fields[2]);
      if (!src || !dst || !w) throw Error(ErrorCode::ParseError, where);
      edges.emplace_back(*src, *dst, *w);
    }
    if (!sized) {
      std::uint64_t n = 0;
      for (const auto& [s, d, w] : edges) n = std::max({n, s + 1, d + 1});
      g = SparseGraph(n);
    }
    for (const auto& [s, d, w] : edges) add(s, d, w, path.string());
  }
  g.modality = path.stem().string();
  g.validate();
  return g;
}

}  // namespace fgf
