#pragma once

// Shared file helpers for the text and binary formats.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fgf::io {

/// Throws FileNotFound when the path does not exist or cannot be opened.
std::ifstream open_input(const std::filesystem::path& path,
                         std::ios::openmode mode = std::ios::in);
/// Throws IoError when the file cannot be created.
std::ofstream open_output(const std::filesystem::path& path, bool binary);
/// Flushes and throws IoError if any write failed.
void finish_output(std::ofstream& out, const std::filesystem::path& path);

std::string_view trim(std::string_view s);
/// Splits on tab when the line contains one, on comma otherwise.
void split_fields(std::string_view line, std::vector<std::string_view>& out);
std::optional<double> parse_double(std::string_view s);
std::optional<std::uint64_t> parse_u64(std::string_view s);
/// Shortest representation that round-trips exactly.
void append_double(std::string& out, double v);
std::string format_double(double v);

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}
  void magic(const char* tag) { out_.write(tag, 4); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::filesystem::path path);
  /// Throws ParseError when the first four bytes differ from `tag`.
  void expect_magic(const char* tag);
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  /// Throws ParseError unless at least `bytes` remain.
  void require_remaining(std::uint64_t bytes);
  bool at_end();

 private:
  void read(unsigned char* dst, std::size_t count);

  std::istream& in_;
  std::filesystem::path path_;
  std::uint64_t offset_ = 0;
  std::uint64_t size_ = 0;
};

}  // namespace fgf::io
