#include "fgf/io_util.hpp"

#include <bit>
#include <charconv>
#include <cmath>

#include "fgf/error.hpp"

namespace fgf::io {

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::FileNotFound, path.string());
  }
  std::ifstream in(path, mode);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string() + " (cannot open)");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::out | std::ios::binary | std::ios::trunc
                                 : std::ios::out | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

void split_fields(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  const char delim = line.find('\t') != std::string_view::npos ? '\t' : ',';
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
}

std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc::result_out_of_range) {
    // overflowed literals such as 1e999 are reported as non-finite downstream
    return s.front() == '-' ? -HUGE_VAL : HUGE_VAL;
  }
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

void append_double(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

void BinaryWriter::u32(std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out_.write(reinterpret_cast<const char*>(b), 4);
}

void BinaryWriter::u64(std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out_.write(reinterpret_cast<const char*>(b), 8);
}

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

BinaryReader::BinaryReader(std::istream& in, std::filesystem::path path)
    : in_(in), path_(std::move(path)) {
  const auto start = in_.tellg();
  in_.seekg(0, std::ios::end);
  size_ = static_cast<std::uint64_t>(in_.tellg() - start);
  in_.seekg(start);
}

void BinaryReader::read(unsigned char* dst, std::size_t count) {
  if (!in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(count))) {
    throw Error(ErrorCode::ParseError,
                path_.string() + ": truncated at offset " + std::to_string(offset_));
  }
  offset_ += count;
}

void BinaryReader::expect_magic(const char* tag) {
  unsigned char b[4];
  read(b, 4);
  for (int i = 0; i < 4; ++i) {
    if (static_cast<char>(b[i]) != tag[i]) {
      throw Error(ErrorCode::ParseError,
                  path_.string() + ": bad magic, expected '" + std::string(tag, 4) + "'");
    }
  }
}

std::uint32_t BinaryReader::u32() {
  unsigned char b[4];
  read(b, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t BinaryReader::u64() {
  unsigned char b[8];
  read(b, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

void BinaryReader::require_remaining(std::uint64_t bytes) {
  if (size_ - offset_ < bytes) {
    throw Error(ErrorCode::ParseError, path_.string() + ": expected " + std::to_string(bytes) +
                                           " payload bytes at offset " + std::to_string(offset_) +
                                           ", file has " + std::to_string(size_ - offset_));
  }
}

bool BinaryReader::at_end() { return offset_ >= size_; }

}  // namespace fgf::io
