#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mbti/util/error.hpp"

namespace mbti {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

// Little-endian binary stream helpers used by the model-bundle and
// feature-matrix containers.
class BinaryWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
  void str(const std::string& s) {
    u64(s.size());
    buf_.append(s);
  }
  void f64_vec(const std::vector<double>& v) {
    u64(v.size());
    if (!v.empty()) raw(v.data(), v.size() * 8);
  }
  void u32_vec(const std::vector<std::uint32_t>& v) {
    u64(v.size());
    if (!v.empty()) raw(v.data(), v.size() * 4);
  }

  const std::string& buffer() const { return buf_; }

 private:
  void raw(const void* p, std::size_t n) {
    buf_.append(static_cast<const char*>(p), n);
  }
  std::string buf_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::string_view data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint32_t u32() {
    std::uint32_t v;
    std::memcpy(&v, take(4), 4);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    std::memcpy(&v, take(8), 8);
    return v;
  }
  double f64() {
    double v;
    std::memcpy(&v, take(8), 8);
    return v;
  }
  std::string str() {
    const std::uint64_t n = u64();
    return std::string(take(n), n);
  }
  std::vector<double> f64_vec() {
    const std::uint64_t n = u64();
    std::vector<double> v(n);
    if (n) std::memcpy(v.data(), take(n * 8), n * 8);
    return v;
  }
  std::vector<std::uint32_t> u32_vec() {
    const std::uint64_t n = u64();
    std::vector<std::uint32_t> v(n);
    if (n) std::memcpy(v.data(), take(n * 4), n * 4);
    return v;
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  const char* take(std::size_t n) {
    if (pos_ + n > data_.size()) throw FormatError("binary container truncated");
    const char* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace mbti
