#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgf/dataset.hpp"
#include "fgf/knn.hpp"

namespace fgf {

enum class SplitProtocol {
  PerClassTrainM,     // m random training samples per class, rest test
  LeaveInstanceOut,   // one random instance per class held out for testing
  RandomFraction,     // random fraction of all samples used for training
};

SplitProtocol parse_split_protocol(const std::string& name);
std::string to_string(SplitProtocol protocol);

struct SplitSpec {
  SplitProtocol protocol = SplitProtocol::PerClassTrainM;
  std::size_t m = 3;
  double fraction = 0.5;
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<Index> train;  // ascending
  std::vector<Index> test;   // ascending
};

/// `repeats` train/test partitions of all samples, deterministic in seed.
/// Throws InvalidSpec for malformed specs and ClassTooSmall when a class
/// cannot supply m training samples plus at least one test sample (or has
/// fewer than two instances under leave-instance-out).
std::vector<Split> make_splits(const LabelVector& labels, const SplitSpec& spec);

/// Fraction of test samples whose majority label among the `votes` nearest
/// training samples is correct. Tied votes go to the tied class whose member
/// ranks nearest. Throws EmptyTrainSet when `train` is empty.
double knn_classify(const Matrix& points, const LabelVector& labels, const std::vector<Index>& train,
                    const std::vector<Index>& test, Metric metric, std::size_t votes = 1);

/// Leave-one-out 1-NN accuracy over all samples (each sample classified by
/// its nearest other sample).
double leave_one_out_accuracy(const Matrix& points, const std::vector<std::uint32_t>& classes,
                              Metric metric);

struct ResultRow {
  std::string method;
  std::size_t k = 0;  // 0 for baselines
  std::size_t d = 0;  // feature dimensionality of the evaluated space
  std::vector<double> accuracies;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n-1)
};

/// Mean and sample standard deviation of a per-split accuracy list.
std::pair<double, double> mean_std(const std::vector<double>& values);
ResultRow make_row(std::string method, std::size_t k, std::size_t d, std::vector<double> accuracies);

struct ResultTable {
  std::vector<ResultRow> rows;
};

/// CSV: method,k,d,s-1..s-R,mean,std with shortest round-trip numbers.
std::string to_csv(const ResultTable& table);
ResultTable parse_results_csv(const std::string& text);

enum class SweepAxis { K, D };
SweepAxis parse_sweep_axis(const std::string& name);

struct SweepEntry {
  std::size_t value = 0;
  std::size_t rows = 0;
  double mean = 0.0;  // mean of the row means at this axis value
  double min = 0.0;
  double max = 0.0;
  double spread = 0.0;  // max - min of the row means at this axis value
};

struct SweepSummary {
  SweepAxis axis = SweepAxis::K;
  std::vector<SweepEntry> entries;  // ascending axis value
  double spread = 0.0;              // max - min over the entry means
};

/// Sensitivity of FGF rows (k > 0) to one axis. Throws InsufficientData when
/// fewer than two distinct axis values are present.
SweepSummary sweep_summary(const ResultTable& table, SweepAxis axis);
std::string sweep_report(const ResultTable& table, SweepAxis axis);

}  // namespace fgf
