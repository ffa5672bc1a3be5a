#include "fgf/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "fgf/error.hpp"
#include "fgf/io_util.hpp"
#include "fgf/random.hpp"

namespace fgf {

namespace {

constexpr std::uint32_t kMatrixVersion = 1;

void check_finite(const Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (!std::isfinite(m(r, c))) {
        throw Error(ErrorCode::NonFiniteValue,
                    "row " + std::to_string(r) + ", column " + std::to_string(c));
      }
    }
  }
}

Matrix read_csv_matrix(const std::filesystem::path& path, CsvOptions opts) {
  std::ifstream in = io::open_input(path);
  std::vector<double> data;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> fields;
  while (std::getline(in, line)) {
    ++line_no;
    if (opts.header && line_no == 1) continue;
    std::string_view view = io::trim(line);
    if (view.empty()) continue;
    io::split_fields(view, fields);
    if (rows == 0) {
      cols = fields.size();
    } else if (fields.size() != cols) {
      throw Error(ErrorCode::DimensionMismatch,
                  path.string() + " line " + std::to_string(line_no) + ": expected " +
                      std::to_string(cols) + " fields, got " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      auto value = io::parse_double(fields[c]);
      if (!value) {
        throw Error(ErrorCode::ParseError, path.string() + " line " + std::to_string(line_no) +
                                               ", field " + std::to_string(c + 1) + ": '" +
                                               std::string(fields[c]) + "'");
      }
      if (!std::isfinite(*value)) {
        throw Error(ErrorCode::NonFiniteValue,
                    "row " + std::to_string(rows) + ", column " + std::to_string(c));
      }
      data.push_back(*value);
    }
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::ParseError, path.string() + ": no data rows");
  return Matrix(rows, cols, std::move(data));
}

Matrix read_binary_matrix(const std::filesystem::path& path, const char* magic) {
  std::ifstream in = io::open_input(path, std::ios::binary);
  io::BinaryReader reader(in, path);
  reader.expect_magic(magic);
  const auto version = reader.u32();
  if (version != kMatrixVersion) {
    throw Error(ErrorCode::ParseError, path.string() + ": unsupported version " +
                                           std::to_string(version));
  }
  const auto rows = reader.u64();
  const auto cols = reader.u64();
  reader.require_remaining(rows * cols * 8);
  std::vector<double> data(rows * cols);
  for (auto& v : data) v = reader.f64();
  return Matrix(rows, cols, std::move(data));
}

}  // namespace

FileFormat parse_file_format(const std::string& name) {
  if (name == "csv") return FileFormat::Csv;
  if (name == "binary" || name == "bin") return FileFormat::Binary;
  throw Error(ErrorCode::InvalidConfig, "unknown file format '" + name + "'");
}

std::string to_string(FileFormat format) {
  return format == FileFormat::Csv ? "csv" : "binary";
}

FeatureMatrix::FeatureMatrix(std::string modality, Matrix values)
    : modality_(std::move(modality)), values_(std::move(values)) {
  if (values_.rows() < 2 || values_.cols() < 1) {
    throw Error(ErrorCode::InvalidConfig, "feature matrix needs n >= 2 and D >= 1, got " +
                                              std::to_string(values_.rows()) + "x" +
                                              std::to_string(values_.cols()));
  }
  check_finite(values_);
}

EmbeddingMatrix::EmbeddingMatrix(Matrix vectors) : vectors_(std::move(vectors)) {
  if (vectors_.cols() < 1) throw Error(ErrorCode::InvalidConfig, "embedding needs d >= 1");
  check_finite(vectors_);
}

LabelVector::LabelVector(std::vector<std::string> labels,
                         std::optional<std::vector<std::string>> instance_ids)
    : labels_(std::move(labels)), instance_ids_(std::move(instance_ids)) {
  if (instance_ids_ && instance_ids_->size() != labels_.size()) {
    throw Error(ErrorCode::LengthMismatch, "instance ids and labels differ in length");
  }
  std::map<std::string, std::uint32_t> ids;
  class_ids_.reserve(labels_.size());
  for (const auto& label : labels_) {
    auto [it, inserted] = ids.try_emplace(label, static_cast<std::uint32_t>(class_names_.size()));
    if (inserted) class_names_.push_back(label);
    class_ids_.push_back(it->second);
  }
}

void LabelVector::require_length(std::size_t n) const {
  if (labels_.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "labels have " + std::to_string(labels_.size()) +
                                               " entries, features have " + std::to_string(n));
  }
}

Matrix read_matrix(const std::filesystem::path& path, FileFormat format, const char* magic,
                   CsvOptions csv) {
  return format == FileFormat::Csv ? read_csv_matrix(path, csv) : read_binary_matrix(path, magic);
}

void write_matrix(const Matrix& m, const std::filesystem::path& path, FileFormat format,
                  const char* magic) {
  std::ofstream out = io::open_output(path, format == FileFormat::Binary);
  if (format == FileFormat::Csv) {
    std::string line;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      line.clear();
      for (std::size_t c = 0; c < m.cols(); ++c) {
        if (c) line += ',';
        io::append_double(line, m(r, c));
      }
      line += '\n';
      out << line;
    }
  } else {
    io::BinaryWriter writer(out);
    writer.magic(magic);
    writer.u32(kMatrixVersion);
    writer.u64(m.rows());
    writer.u64(m.cols());
    for (double v : m.values()) writer.f64(v);
  }
  io::finish_output(out, path);
}

FeatureMatrix load_features(const std::filesystem::path& path, FileFormat format,
                            std::string modality, CsvOptions csv) {
  if (modality.empty()) modality = path.stem().string();
  return FeatureMatrix(std::move(modality), read_matrix(path, format, "EJGF", csv));
}

void save_features(const FeatureMatrix& features, const std::filesystem::path& path,
                   FileFormat format) {
  write_matrix(features.values(), path, format, "EJGF");
}

LabelVector load_labels(const std::filesystem::path& path) {
  std::ifstream in = io::open_input(path);
  std::vector<std::string> labels;
  std::vector<std::string> instances;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> fields;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = io::trim(line);
    if (view.empty()) continue;
    io::split_fields(view, fields);
    if (fields.size() > 2 || fields[0].empty()) {
      throw Error(ErrorCode::ParseError,
                  path.string() + " line " + std::to_string(line_no) + ": expected label[,instance]");
    }
    const bool with_instance = fields.size() == 2;
    if (!labels.empty() && with_instance != !instances.empty()) {
      throw Error(ErrorCode::ParseError, path.string() + " line " + std::to_string(line_no) +
                                             ": instance ids must be given for all or no records");
    }
    labels.emplace_back(fields[0]);
    if (with_instance) instances.emplace_back(fields[1]);
  }
  if (labels.empty()) throw Error(ErrorCode::ParseError, path.string() + ": no labels");
  if (instances.empty()) return LabelVector(std::move(labels));
  return LabelVector(std::move(labels), std::move(instances));
}

void save_labels(const LabelVector& labels, const std::filesystem::path& path) {
  std::ofstream out = io::open_output(path, false);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << labels.labels()[i];
    if (labels.has_instances()) out << ',' << labels.instance_ids()[i];
    out << '\n';
  }
  io::finish_output(out, path);
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, FileFormat format) {
  return EmbeddingMatrix(read_matrix(path, format, "EJGE"));
}

void save_embeddings(const EmbeddingMatrix& embeddings, const std::filesystem::path& path,
                     FileFormat format) {
  write_matrix(embeddings.vectors(), path, format, "EJGE");
}

SyntheticData synth_multimodal(std::size_t n_classes, std::size_t per_class, double noise,
                               double complementarity, std::uint64_t seed) {
  if (n_classes < 2 || per_class < 2) {
    throw Error(ErrorCode::InvalidConfig, "synth_multimodal needs n_classes >= 2, per_class >= 2");
  }
  if (!(noise >= 0.0) || !std::isfinite(noise)) {
    throw Error(ErrorCode::InvalidConfig, "noise must be finite and >= 0");
  }
  if (!(complementarity >= 0.0 && complementarity <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "complementarity must lie in [0, 1]");
  }

  const std::size_t half = (n_classes + 1) / 2;
  const std::size_t dims = n_classes;

  // Class means for one modality: classes in [sep_begin, sep_end) keep their
  // own axis, the rest are merged pairwise.
  auto means_for = [&](std::size_t sep_begin, std::size_t sep_end) {
    Matrix means(n_classes, dims);
    std::vector<std::size_t> merged;
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (c >= sep_begin && c < sep_end) {
        means(c, c) = 1.0;
      } else {
        merged.push_back(c);
      }
    }
    for (std::size_t p = 0; p < merged.size(); p += 2) {
      const std::size_t group_end = std::min(p + 2, merged.size());
      const double share = 1.0 / static_cast<double>(group_end - p);
      for (std::size_t a = p; a < group_end; ++a) {
        const std::size_t c = merged[a];
        means(c, c) += 1.0 - complementarity;
        for (std::size_t b = p; b < group_end; ++b) {
          means(c, merged[b]) += complementarity * share;
        }
      }
    }
    return means;
  };

  const Matrix means_a = means_for(0, half);
  const Matrix means_b = means_for(half, n_classes);

  const std::size_t n = n_classes * per_class;
  Matrix a(n, dims);
  Matrix b(n, dims);
  std::vector<std::string> labels;
  std::vector<std::string> instances;
  labels.reserve(n);
  instances.reserve(n);
  Rng rng(seed);
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t s = 0; s < per_class; ++s) {
      const std::size_t row = c * per_class + s;
      for (std::size_t j = 0; j < dims; ++j) a(row, j) = means_a(c, j) + noise * rng.normal();
      for (std::size_t j = 0; j < dims; ++j) b(row, j) = means_b(c, j) + noise * rng.normal();
      labels.push_back("c" + std::to_string(c));
      instances.push_back("c" + std::to_string(c) + "_i" + std::to_string(2 * s / per_class));
    }
  }
  return SyntheticData{FeatureMatrix("modality_a", std::move(a)),
                       FeatureMatrix("modality_b", std::move(b)),
                       LabelVector(std::move(labels), std::move(instances))};
}

Matrix concat_zscore(const std::vector<FeatureMatrix>& modalities) {
  if (modalities.empty()) throw Error(ErrorCode::InvalidConfig, "no modalities to concatenate");
  const std::size_t n = modalities.front().samples();
  std::size_t total = 0;
  for (const auto& m : modalities) {
    if (m.samples() != n) {
      throw Error(ErrorCode::LengthMismatch, "modality '" + m.modality() + "' has " +
                                                 std::to_string(m.samples()) + " samples, expected " +
                                                 std::to_string(n));
    }
    total += m.dims();
  }
  Matrix out(n, total);
  std::size_t offset = 0;
  for (const auto& m : modalities) {
    const Matrix& v = m.values();
    for (std::size_t c = 0; c < v.cols(); ++c) {
      double mean = 0.0;
      for (std::size_t r = 0; r < n; ++r) mean += v(r, c);
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t r = 0; r < n; ++r) var += (v(r, c) - mean) * (v(r, c) - mean);
      var /= static_cast<double>(n);
      // constant columns carry no information; map them to zero
      const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
      for (std::size_t r = 0; r < n; ++r) out(r, offset + c) = (v(r, c) - mean) * scale;
    }
    offset += v.cols();
  }
  return out;
}

}  // namespace fgf
