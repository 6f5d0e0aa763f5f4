#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "twr/core/error.hpp"
#include "twr/core/hash.hpp"

namespace twr {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts need byte swapping");

// Append-only little-endian byte buffer.
class ByteWriter {
 public:
  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T v) {
    const auto old = buf_.size();
    buf_.resize(old + sizeof(T));
    std::memcpy(buf_.data() + old, &v, sizeof(T));
  }

  void put_bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

  void put_doubles(std::span<const double> v) {
    const auto old = buf_.size();
    buf_.resize(old + v.size_bytes());
    std::memcpy(buf_.data() + old, v.data(), v.size_bytes());
  }

  void put_string(std::string_view s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    put_bytes(s);
  }

  // Seals the buffer with a CRC32 of everything written so far.
  void put_checksum() { put<std::uint32_t>(crc32_of(buf_)); }

  const std::vector<std::uint8_t>& bytes() const noexcept { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data, std::string what)
      : data_(data), what_(std::move(what)) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_bytes(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::string get_string() { return get_bytes(get<std::uint32_t>()); }

  void get_doubles(std::span<double> out) {
    need(out.size_bytes());
    std::memcpy(out.data(), data_.data() + pos_, out.size_bytes());
    pos_ += out.size_bytes();
  }

  std::size_t remaining() const noexcept { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw LoadError(what_ + ": unexpected end of data");
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string what_;
};

// Verifies the trailing CRC32 and returns the payload without it.
inline std::span<const std::uint8_t> verify_checksum(std::span<const std::uint8_t> file, const std::string& what) {
  if (file.size() < 4) throw LoadError(what + ": file too short");
  const auto payload = file.first(file.size() - 4);
  std::uint32_t stored;
  std::memcpy(&stored, file.data() + payload.size(), 4);
  if (stored != crc32_of(payload)) throw LoadError(what + ": checksum mismatch (truncated or corrupted file)");
  return payload;
}

}  // namespace twr
