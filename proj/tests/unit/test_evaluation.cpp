#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "fgf/dataset.hpp"
#include "fgf/error.hpp"
#include "fgf/evaluation.hpp"
#include "oracles.hpp"

namespace {

using fgf::Index;
using fgf::LabelVector;
using fgf::Matrix;
using fgf::Metric;
using fgf::SplitProtocol;
using fgf::SplitSpec;

LabelVector blocks(std::size_t classes, std::size_t per_class) {
  std::vector<std::string> l;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) l.push_back("c" + std::to_string(c));
  }
  return LabelVector(l);
}

void expect_partition(const fgf::Split& s, std::size_t n) {
  std::vector<Index> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  ASSERT_EQ(all.size(), n);
  for (Index i = 0; i < n; ++i) EXPECT_EQ(all[i], i);
  EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
  EXPECT_TRUE(std::is_sorted(s.test.begin(), s.test.end()));
}

fgf::ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const fgf::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no fgf::Error thrown";
  return fgf::ErrorCode::Divergence;
}

TEST(Splits, PerClassTrainMSizes) {
  SplitSpec spec;
  spec.m = 3;
  spec.repeats = 1;
  const auto labels = blocks(3, 10);
  const auto splits = fgf::make_splits(labels, spec);
  ASSERT_EQ(splits.size(), 1u);
  EXPECT_EQ(splits[0].train.size(), 9u);
  EXPECT_EQ(splits[0].test.size(), 21u);
  std::vector<int> per_class(3, 0);
  for (Index i : splits[0].train) ++per_class[labels.class_ids()[i]];
  EXPECT_EQ(per_class, (std::vector<int>{3, 3, 3}));
  expect_partition(splits[0], 30);
}

TEST(Splits, RepeatsAreDistinctAndReproducible) {
  SplitSpec spec;
  spec.repeats = 10;
  spec.seed = 4;
  const auto labels = blocks(4, 8);
  const auto a = fgf::make_splits(labels, spec);
  const auto b = fgf::make_splits(labels, spec);
  ASSERT_EQ(a.size(), 10u);
  std::set<std::vector<Index>> distinct;
  for (std::size_t r = 0; r < 10; ++r) {
    EXPECT_EQ(a[r].train, b[r].train);
    EXPECT_EQ(a[r].test, b[r].test);
    expect_partition(a[r], 32);
    distinct.insert(a[r].train);
  }
  EXPECT_EQ(distinct.size(), 10u);
  spec.seed = 5;
  EXPECT_NE(fgf::make_splits(labels, spec)[0].train, a[0].train);
}

TEST(Splits, LeaveInstanceOut) {
  std::vector<std::string> l, inst;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 3; ++i) {
      for (int v = 0; v < 4; ++v) {
        l.push_back("c" + std::to_string(c));
        inst.push_back("c" + std::to_string(c) + "_" + std::to_string(i));
      }
    }
  }
  const LabelVector labels(l, inst);
  SplitSpec spec;
  spec.protocol = SplitProtocol::LeaveInstanceOut;
  spec.repeats = 5;
  for (const auto& s : fgf::make_splits(labels, spec)) {
    expect_partition(s, l.size());
    std::set<std::string> held;
    for (Index i : s.test) held.insert(inst[i]);
    EXPECT_EQ(held.size(), 3u);  // one instance per class
    EXPECT_EQ(s.test.size(), 12u);
    for (Index i : s.train) EXPECT_EQ(held.count(inst[i]), 0u);
  }
  spec.protocol = SplitProtocol::LeaveInstanceOut;
  EXPECT_EQ(code_of([&] { fgf::make_splits(blocks(2, 4), spec); }), fgf::ErrorCode::InvalidSpec);
}

TEST(Splits, RandomFraction) {
  SplitSpec spec;
  spec.protocol = SplitProtocol::RandomFraction;
  spec.fraction = 0.25;
  spec.repeats = 3;
  for (const auto& s : fgf::make_splits(blocks(2, 20), spec)) {
    expect_partition(s, 40);
    EXPECT_EQ(s.train.size(), 10u);
  }
}

TEST(Splits, Errors) {
  SplitSpec spec;
  spec.m = 10;
  EXPECT_EQ(code_of([&] { fgf::make_splits(blocks(3, 10), spec); }), fgf::ErrorCode::ClassTooSmall);
  spec.m = 0;
  EXPECT_EQ(code_of([&] { fgf::make_splits(blocks(3, 10), spec); }), fgf::ErrorCode::InvalidSpec);
  spec = SplitSpec{};
  spec.repeats = 0;
  EXPECT_EQ(code_of([&] { fgf::make_splits(blocks(3, 10), spec); }), fgf::ErrorCode::InvalidSpec);
  spec = SplitSpec{};
  spec.protocol = SplitProtocol::RandomFraction;
  spec.fraction = 1.0;
  EXPECT_EQ(code_of([&] { fgf::make_splits(blocks(3, 10), spec); }), fgf::ErrorCode::InvalidSpec);
  EXPECT_EQ(code_of([] { fgf::parse_split_protocol("kfold"); }), fgf::ErrorCode::InvalidSpec);
}

TEST(Classify, DuplicateOfTrainingPointIsCorrect) {
  const Matrix x(4, 2, {0, 0, 5, 5, 0, 0, 9, 1});
  const LabelVector labels({"a", "b", "a", "c"});
  EXPECT_EQ(fgf::knn_classify(x, labels, {0, 1, 3}, {2}, Metric::Euclidean, 1), 1.0);
}

TEST(Classify, TiedVotesGoToNearest) {
  // Query at 0; training samples: a at 1, b at -0.5. Two votes tie 1:1, the
  // nearest member (b) decides.
  const Matrix x(3, 1, {0.0, 1.0, -0.5});
  const LabelVector labels({"b", "a", "b"});
  EXPECT_EQ(fgf::knn_classify(x, labels, {1, 2}, {0}, Metric::Euclidean, 2), 1.0);
  const LabelVector flipped({"a", "a", "b"});
  EXPECT_EQ(fgf::knn_classify(x, flipped, {1, 2}, {0}, Metric::Euclidean, 2), 0.0);
}

TEST(Classify, MajorityVote) {
  const Matrix x(5, 1, {0.0, 0.1, 0.3, 0.35, 0.4});
  const LabelVector labels({"a", "b", "a", "a", "b"});
  EXPECT_EQ(fgf::knn_classify(x, labels, {1, 2, 3, 4}, {0}, Metric::Euclidean, 1), 0.0);
  EXPECT_EQ(fgf::knn_classify(x, labels, {1, 2, 3, 4}, {0}, Metric::Euclidean, 3), 1.0);
}

TEST(Classify, PermutedLabelsAreChanceLevel) {
  const Matrix x = oracle::random_matrix(200, 5, 31);
  std::vector<std::string> base;
  for (int i = 0; i < 200; ++i) base.push_back(i % 2 ? "a" : "b");
  double total = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto l = base;
    std::shuffle(l.begin(), l.end(), std::mt19937_64(seed));
    const LabelVector labels(l);
    SplitSpec spec;
    spec.protocol = SplitProtocol::RandomFraction;
    spec.repeats = 1;
    spec.seed = seed;
    const auto s = fgf::make_splits(labels, spec)[0];
    const double acc = fgf::knn_classify(x, labels, s.train, s.test, Metric::Euclidean, 1);
    EXPECT_GE(acc, 0.35);
    EXPECT_LE(acc, 0.65);
    total += acc;
  }
  EXPECT_GE(total / 10, 0.4);
  EXPECT_LE(total / 10, 0.6);
}

TEST(Classify, NoiseFreeConcatenationIsPerfect) {
  const auto s = fgf::synth_multimodal(6, 10, 0.0, 1.0, 2);
  const Matrix joint = fgf::concat_zscore({s.modality_a, s.modality_b});
  SplitSpec spec;
  spec.repeats = 3;
  for (const auto& sp : fgf::make_splits(s.labels, spec)) {
    EXPECT_EQ(fgf::knn_classify(joint, s.labels, sp.train, sp.test, Metric::Euclidean, 1), 1.0);
  }
}

TEST(Classify, Errors) {
  const Matrix x(3, 1, {0.0, 1.0, 2.0});
  const LabelVector labels({"a", "b", "a"});
  EXPECT_EQ(code_of([&] { fgf::knn_classify(x, labels, {}, {0}, Metric::Euclidean, 1); }),
            fgf::ErrorCode::EmptyTrainSet);
}

TEST(Classify, LeaveOneOut) {
  const Matrix x(4, 1, {0.0, 0.1, 5.0, 5.1});
  EXPECT_EQ(fgf::leave_one_out_accuracy(x, {0, 0, 1, 1}, Metric::Euclidean), 1.0);
  EXPECT_EQ(fgf::leave_one_out_accuracy(x, {0, 1, 0, 1}, Metric::Euclidean), 0.0);
}

TEST(Results, MeanAndSampleStd) {
  const auto [mean, sd] = fgf::mean_std({0.9, 0.92, 0.94});
  EXPECT_NEAR(mean, 0.92, 1e-15);
  EXPECT_NEAR(sd, 0.02, 1e-15);
  const auto row = fgf::make_row("fgf", 50, 100, {1.0, 0.5});
  EXPECT_EQ(row.mean, 0.75);
  EXPECT_NEAR(row.std, std::sqrt(0.125), 1e-15);
}

TEST(Results, CsvRoundTrip) {
  fgf::ResultTable t;
  t.rows.push_back(fgf::make_row("rgb", 0, 10, {0.1, 1.0 / 3.0, 0.7}));
  t.rows.push_back(fgf::make_row("fgf", 20, 32, {0.95, 0.9, 1.0}));
  const std::string csv = fgf::to_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,k,d,s-1,s-2,s-3,mean,std");
  const auto back = fgf::parse_results_csv(csv);
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(back.rows[0].accuracies, t.rows[0].accuracies);
  EXPECT_EQ(back.rows[1].mean, t.rows[1].mean);
  EXPECT_EQ(back.rows[1].std, t.rows[1].std);
  EXPECT_EQ(fgf::to_csv(back), csv);
}

fgf::ResultTable table3_shaped() {
  fgf::ResultTable t;
  t.rows.push_back(fgf::make_row("rgb", 0, 64, {0.5, 0.6}));
  double v = 0.8;
  for (std::size_t k : {50, 100, 150}) {
    for (std::size_t d : {50, 100, 200}) {
      t.rows.push_back(fgf::make_row("fgf", k, d, {v, v + 0.01}));
      v += 0.013;
    }
  }
  return t;
}

TEST(Sweep, IdenticalAccuraciesHaveZeroSpread) {
  fgf::ResultTable t;
  for (std::size_t k : {10, 20, 30}) t.rows.push_back(fgf::make_row("fgf", k, 8, {0.9, 0.8}));
  const auto s = fgf::sweep_summary(t, fgf::SweepAxis::K);
  EXPECT_EQ(s.spread, 0.0);
  for (const auto& e : s.entries) EXPECT_EQ(e.spread, 0.0);
}

TEST(Sweep, ThreeEntriesPerAxis) {
  const auto t = table3_shaped();
  for (auto axis : {fgf::SweepAxis::K, fgf::SweepAxis::D}) {
    const auto s = fgf::sweep_summary(t, axis);
    ASSERT_EQ(s.entries.size(), 3u);
    for (const auto& e : s.entries) EXPECT_EQ(e.rows, 3u);
  }
}

TEST(Sweep, ReportMatchesIndependentRecomputation) {
  const auto t = table3_shaped();
  // Recompute from the emitted results CSV, as a spreadsheet would.
  std::map<std::size_t, std::vector<double>> by_k;
  std::istringstream results(fgf::to_csv(t));
  std::string line;
  std::getline(results, line);
  while (std::getline(results, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    const std::size_t k = std::stoul(cells[1]);
    if (k == 0) continue;
    const double a = std::stod(cells[3]), b = std::stod(cells[4]);
    by_k[k].push_back((a + b) / 2);
  }
  std::istringstream report(fgf::sweep_report(t, fgf::SweepAxis::K));
  std::getline(report, line);
  EXPECT_EQ(line, "axis,value,rows,mean_accuracy,min_accuracy,max_accuracy,spread");
  std::vector<double> means;
  for (const auto& [k, vals] : by_k) {
    ASSERT_TRUE(std::getline(report, line));
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    ASSERT_EQ(cells.size(), 7u);
    EXPECT_EQ(cells[0], "k");
    EXPECT_EQ(std::stoul(cells[1]), k);
    double sum = 0;
    for (double v : vals) sum += v;
    const double mean = sum / vals.size();
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    EXPECT_NEAR(std::stod(cells[3]), mean, 1e-12);
    EXPECT_NEAR(std::stod(cells[4]), *lo, 1e-12);
    EXPECT_NEAR(std::stod(cells[5]), *hi, 1e-12);
    EXPECT_NEAR(std::stod(cells[6]), *hi - *lo, 1e-12);
    means.push_back(mean);
  }
  ASSERT_TRUE(std::getline(report, line));
  const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
  EXPECT_EQ(line.substr(0, 6), "k,all,");
  EXPECT_NEAR(std::stod(line.substr(line.rfind(',') + 1)), *hi - *lo, 1e-12);
}

TEST(Sweep, InsufficientData) {
  fgf::ResultTable t;
  t.rows.push_back(fgf::make_row("fgf", 10, 8, {0.9}));
  t.rows.push_back(fgf::make_row("fgf", 10, 16, {0.8}));
  EXPECT_EQ(code_of([&] { fgf::sweep_summary(t, fgf::SweepAxis::K); }), fgf::ErrorCode::InsufficientData);
  EXPECT_NO_THROW(fgf::sweep_summary(t, fgf::SweepAxis::D));
}

}  // namespace
