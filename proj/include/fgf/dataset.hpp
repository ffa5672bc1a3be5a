#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "fgf/matrix.hpp"

namespace fgf {

enum class FileFormat { Csv, Binary };

FileFormat parse_file_format(const std::string& name);
std::string to_string(FileFormat format);

/// Per-modality feature set: row i is sample i. Rows of different modalities
/// in one pipeline are aligned by position.
class FeatureMatrix {
 public:
  /// Throws InvalidConfig when n < 2 or D < 1, NonFiniteValue on NaN/Inf.
  FeatureMatrix(std::string modality, Matrix values);

  const std::string& modality() const noexcept { return modality_; }
  const Matrix& values() const noexcept { return values_; }
  std::size_t samples() const noexcept { return values_.rows(); }
  std::size_t dims() const noexcept { return values_.cols(); }

 private:
  std::string modality_;
  Matrix values_;
};

class EmbeddingMatrix {
 public:
  /// Throws InvalidConfig when d < 1, NonFiniteValue on NaN/Inf.
  explicit EmbeddingMatrix(Matrix vectors);

  const Matrix& vectors() const noexcept { return vectors_; }
  std::size_t samples() const noexcept { return vectors_.rows(); }
  std::size_t dims() const noexcept { return vectors_.cols(); }

 private:
  Matrix vectors_;
};

class LabelVector {
 public:
  LabelVector(std::vector<std::string> labels,
              std::optional<std::vector<std::string>> instance_ids = std::nullopt);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  /// Dense class ids in order of first appearance.
  const std::vector<std::uint32_t>& class_ids() const noexcept { return class_ids_; }
  std::size_t class_count() const noexcept { return class_names_.size(); }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }

  bool has_instances() const noexcept { return instance_ids_.has_value(); }
  const std::vector<std::string>& instance_ids() const { return instance_ids_.value(); }

  /// Throws LengthMismatch unless size() == n.
  void require_length(std::size_t n) const;

 private:
  std::vector<std::string> labels_;
  std::optional<std::vector<std::string>> instance_ids_;
  std::vector<std::uint32_t> class_ids_;
  std::vector<std::string> class_names_;
};

struct CsvOptions {
  bool header = false;
};

/// Reads a matrix stored as CSV (comma or tab separated) or in the binary
/// layout identified by `magic` ("EJGF" for features, "EJGE" for embeddings).
Matrix read_matrix(const std::filesystem::path& path, FileFormat format, const char* magic,
                   CsvOptions csv = {});
void write_matrix(const Matrix& m, const std::filesystem::path& path, FileFormat format,
                  const char* magic);

FeatureMatrix load_features(const std::filesystem::path& path, FileFormat format,
                            std::string modality = {}, CsvOptions csv = {});
void save_features(const FeatureMatrix& features, const std::filesystem::path& path,
                   FileFormat format);

/// One record per line: `label[,instance_id]`.
LabelVector load_labels(const std::filesystem::path& path);
void save_labels(const LabelVector& labels, const std::filesystem::path& path);

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, FileFormat format);
void save_embeddings(const EmbeddingMatrix& embeddings, const std::filesystem::path& path,
                     FileFormat format);

struct SyntheticData {
  FeatureMatrix modality_a;
  FeatureMatrix modality_b;
  LabelVector labels;
};

/// Two-modality fixture with complementary class structure.
///
/// Classes are split into two halves. Modality A places every class of the
/// first half on its own axis; classes of the second half are grouped in
/// consecutive pairs whose means are pulled towards the pair centroid by
/// `complementarity` (fully merged at 1). Modality B mirrors this with the
/// halves swapped. Isotropic Gaussian noise of standard deviation `noise`
/// is added to every coordinate. Labels carry instance ids that split each
/// class into two instances.
SyntheticData synth_multimodal(std::size_t n_classes, std::size_t per_class, double noise,
                               double complementarity, std::uint64_t seed);

/// Column-wise z-scored concatenation of modalities (the joint baseline).
Matrix concat_zscore(const std::vector<FeatureMatrix>& modalities);

}  // namespace fgf
