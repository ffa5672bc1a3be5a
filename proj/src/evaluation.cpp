#include "fgf/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "fgf/error.hpp"
#include "fgf/io_util.hpp"
#include "fgf/random.hpp"

namespace fgf {

namespace {

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

std::vector<std::vector<Index>> members_by_class(const LabelVector& labels) {
  std::vector<std::vector<Index>> members(labels.class_count());
  for (Index i = 0; i < labels.size(); ++i) members[labels.class_ids()[i]].push_back(i);
  return members;
}

Split finish(std::vector<Index> train, std::size_t n) {
  std::sort(train.begin(), train.end());
  Split s;
  s.train = std::move(train);
  std::size_t t = 0;
  for (Index i = 0; i < n; ++i) {
    if (t < s.train.size() && s.train[t] == i) {
      ++t;
    } else {
      s.test.push_back(i);
    }
  }
  return s;
}

}  // namespace

SplitProtocol parse_split_protocol(const std::string& name) {
  if (name == "per_class_train_m") return SplitProtocol::PerClassTrainM;
  if (name == "leave_instance_out") return SplitProtocol::LeaveInstanceOut;
  if (name == "random_fraction") return SplitProtocol::RandomFraction;
  throw Error(ErrorCode::InvalidSpec, "unknown split protocol '" + name + "'");
}

std::string to_string(SplitProtocol protocol) {
  switch (protocol) {
    case SplitProtocol::PerClassTrainM: return "per_class_train_m";
    case SplitProtocol::LeaveInstanceOut: return "leave_instance_out";
    case SplitProtocol::RandomFraction: return "random_fraction";
  }
  return "unknown";
}

std::vector<Split> make_splits(const LabelVector& labels, const SplitSpec& spec) {
  if (spec.repeats < 1) throw Error(ErrorCode::InvalidSpec, "repeats must be >= 1");
  if (labels.class_count() < 2) throw Error(ErrorCode::InvalidSpec, "need at least two classes");
  const std::size_t n = labels.size();
  const auto members = members_by_class(labels);
  std::vector<Split> splits;
  splits.reserve(spec.repeats);

  switch (spec.protocol) {
    case SplitProtocol::PerClassTrainM: {
      if (spec.m < 1) throw Error(ErrorCode::InvalidSpec, "m must be >= 1");
      for (std::size_t c = 0; c < members.size(); ++c) {
        if (spec.m >= members[c].size()) {
          throw Error(ErrorCode::ClassTooSmall, "class '" + labels.class_names()[c] + "' has " +
                                                    std::to_string(members[c].size()) +
                                                    " samples, m=" + std::to_string(spec.m));
        }
      }
      for (std::size_t r = 0; r < spec.repeats; ++r) {
        Rng rng(derive_seed(spec.seed, "split", r));
        std::vector<Index> train;
        for (auto pool : members) {
          shuffle(pool, rng);
          train.insert(train.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(spec.m));
        }
        splits.push_back(finish(std::move(train), n));
      }
      break;
    }
    case SplitProtocol::LeaveInstanceOut: {
      if (!labels.has_instances()) {
        throw Error(ErrorCode::InvalidSpec, "leave_instance_out needs instance ids");
      }
      // instances of each class in order of first appearance
      std::vector<std::vector<std::string>> instances(members.size());
      for (std::size_t c = 0; c < members.size(); ++c) {
        for (Index i : members[c]) {
          const auto& id = labels.instance_ids()[i];
          if (std::find(instances[c].begin(), instances[c].end(), id) == instances[c].end()) {
            instances[c].push_back(id);
          }
        }
        if (instances[c].size() < 2) {
          throw Error(ErrorCode::ClassTooSmall,
                      "class '" + labels.class_names()[c] + "' has fewer than two instances");
        }
      }
      for (std::size_t r = 0; r < spec.repeats; ++r) {
        Rng rng(derive_seed(spec.seed, "split", r));
        std::vector<Index> train;
        for (std::size_t c = 0; c < members.size(); ++c) {
          const auto& held_out = instances[c][rng.below(instances[c].size())];
          for (Index i : members[c]) {
            if (labels.instance_ids()[i] != held_out) train.push_back(i);
          }
        }
        splits.push_back(finish(std::move(train), n));
      }
      break;
    }
    case SplitProtocol::RandomFraction: {
      if (!(spec.fraction > 0.0 && spec.fraction < 1.0)) {
        throw Error(ErrorCode::InvalidSpec, "fraction must lie in (0, 1)");
      }
      const auto train_size = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::llround(spec.fraction * static_cast<double>(n))), 1, n - 1);
      for (std::size_t r = 0; r < spec.repeats; ++r) {
        Rng rng(derive_seed(spec.seed, "split", r));
        std::vector<Index> order(n);
        for (Index i = 0; i < n; ++i) order[i] = i;
        shuffle(order, rng);
        order.resize(train_size);
        splits.push_back(finish(std::move(order), n));
      }
      break;
    }
  }
  return splits;
}

double knn_classify(const Matrix& points, const LabelVector& labels, const std::vector<Index>& train,
                    const std::vector<Index>& test, Metric metric, std::size_t votes) {
  if (train.empty()) throw Error(ErrorCode::EmptyTrainSet, "no training samples");
  if (test.empty()) throw Error(ErrorCode::InvalidSpec, "no test samples");
  if (votes < 1) throw Error(ErrorCode::InvalidConfig, "votes must be >= 1");
  labels.require_length(points.rows());
  const KnnIndex index(points, metric);
  const auto& classes = labels.class_ids();
  const std::size_t take = std::min(votes, train.size());
  std::vector<std::pair<double, Index>> ranked(train.size());
  std::vector<std::size_t> tally(labels.class_count());
  std::size_t correct = 0;
  for (Index t : test) {
    for (std::size_t j = 0; j < train.size(); ++j) ranked[j] = {index.distance(t, train[j]), train[j]};
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take), ranked.end());
    std::fill(tally.begin(), tally.end(), 0);
    std::size_t best = 0;
    for (std::size_t j = 0; j < take; ++j) best = std::max(best, ++tally[classes[ranked[j].second]]);
    std::uint32_t predicted = 0;
    for (std::size_t j = 0; j < take; ++j) {
      if (tally[classes[ranked[j].second]] == best) {
        predicted = classes[ranked[j].second];
        break;
      }
    }
    if (predicted == classes[t]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

double leave_one_out_accuracy(const Matrix& points, const std::vector<std::uint32_t>& classes,
                              Metric metric) {
  const KnnIndex index(points, metric);
  const auto lists = index.all_knns(1);
  std::size_t correct = 0;
  for (const auto& l : lists) correct += classes[l.ids.front()] == classes[l.query];
  return static_cast<double>(correct) / static_cast<double>(lists.size());
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

ResultRow make_row(std::string method, std::size_t k, std::size_t d, std::vector<double> accuracies) {
  ResultRow row{std::move(method), k, d, std::move(accuracies), 0.0, 0.0};
  std::tie(row.mean, row.std) = mean_std(row.accuracies);
  return row;
}

std::string to_csv(const ResultTable& table) {
  std::size_t splits = 0;
  for (const auto& r : table.rows) splits = std::max(splits, r.accuracies.size());
  std::string out = "method,k,d";
  for (std::size_t s = 1; s <= splits; ++s) out += ",s-" + std::to_string(s);
  out += ",mean,std\n";
  for (const auto& r : table.rows) {
    out += r.method + ',' + std::to_string(r.k) + ',' + std::to_string(r.d);
    for (std::size_t s = 0; s < splits; ++s) {
      out += ',';
      if (s < r.accuracies.size()) io::append_double(out, r.accuracies[s]);
    }
    out += ',';
    io::append_double(out, r.mean);
    out += ',';
    io::append_double(out, r.std);
    out += '\n';
  }
  return out;
}

ResultTable parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string_view> fields;
  ResultTable table;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = io::trim(line);
    if (view.empty()) continue;
    io::split_fields(view, fields);
    if (line_no == 1) {
      if (fields.size() < 5 || fields[0] != "method") {
        throw Error(ErrorCode::ParseError, "results header must start with method,k,d");
      }
      columns = fields.size();
      continue;
    }
    const std::string where = "results line " + std::to_string(line_no);
    if (fields.size() != columns) throw Error(ErrorCode::ParseError, where + ": wrong field count");
    ResultRow row;
    row.method = std::string(fields[0]);
    const auto k = io::parse_u64(fields[1]);
    const auto d = io::parse_u64(fields[2]);
    if (!k || !d) throw Error(ErrorCode::ParseError, where + ": bad k or d");
    row.k = *k;
    row.d = *d;
    for (std::size_t c = 3; c + 2 < columns; ++c) {
      if (fields[c].empty()) continue;
      const auto v = io::parse_double(fields[c]);
      if (!v) throw Error(ErrorCode::ParseError, where + ": bad accuracy");
      row.accuracies.push_back(*v);
    }
    const auto mean = io::parse_double(fields[columns - 2]);
    const auto sd = io::parse_double(fields[columns - 1]);
    if (!mean || !sd) throw Error(ErrorCode::ParseError, where + ": bad mean/std");
    row.mean = *mean;
    row.std = *sd;
    table.rows.push_back(std::move(row));
  }
  return table;
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "k") return SweepAxis::K;
  if (name == "d") return SweepAxis::D;
  throw Error(ErrorCode::InvalidConfig, "sweep axis must be k or d");
}

SweepSummary sweep_summary(const ResultTable& table, SweepAxis axis) {
  std::map<std::size_t, std::vector<double>> groups;
  for (const auto& r : table.rows) {
    if (r.k == 0) continue;  // baselines
    groups[axis == SweepAxis::K ? r.k : r.d].push_back(r.mean);
  }
  if (groups.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "sweep needs at least two distinct axis values");
  }
  SweepSummary summary;
  summary.axis = axis;
  for (const auto& [value, means] : groups) {
    SweepEntry e;
    e.value = value;
    e.rows = means.size();
    e.mean = mean_std(means).first;
    e.min = *std::min_element(means.begin(), means.end());
    e.max = *std::max_element(means.begin(), means.end());
    e.spread = e.max - e.min;
    summary.entries.push_back(e);
  }
  double lo = summary.entries.front().mean;
  double hi = lo;
  for (const auto& e : summary.entries) {
    lo = std::min(lo, e.mean);
    hi = std::max(hi, e.mean);
  }
  summary.spread = hi - lo;
  return summary;
}

std::string sweep_report(const ResultTable& table, SweepAxis axis) {
  const SweepSummary s = sweep_summary(table, axis);
  const std::string name = axis == SweepAxis::K ? "k" : "d";
  std::string out = "axis,value,rows,mean_accuracy,min_accuracy,max_accuracy,spread\n";
  std::size_t total_rows = 0;
  double lo = s.entries.front().mean;
  double hi = lo;
  std::vector<double> means;
  for (const auto& e : s.entries) {
    out += name + ',' + std::to_string(e.value) + ',' + std::to_string(e.rows) + ',';
    io::append_double(out, e.mean);
    out += ',';
    io::append_double(out, e.min);
    out += ',';
    io::append_double(out, e.max);
    out += ',';
    io::append_double(out, e.spread);
    out += '\n';
    total_rows += e.rows;
    lo = std::min(lo, e.mean);
    hi = std::max(hi, e.mean);
    means.push_back(e.mean);
  }
  // summary line: statistics over the per-value means
  out += name + ",all," + std::to_string(total_rows) + ',';
  io::append_double(out, mean_std(means).first);
  out += ',';
  io::append_double(out, lo);
  out += ',';
  io::append_double(out, hi);
  out += ',';
  io::append_double(out, s.spread);
  out += '\n';
  return out;
}

}  // namespace fgf
