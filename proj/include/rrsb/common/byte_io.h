#ifndef RRSB_COMMON_BYTE_IO_H_
#define RRSB_COMMON_BYTE_IO_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rrsb/common/error.h"

namespace rrsb {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

// Appends big-endian integers to a growable buffer.
class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(Bytes* out) : out_(out) {}

  void U8(uint8_t v) { buf().push_back(v); }
  void U16(uint16_t v) { Put(v, 2); }
  void U24(uint32_t v) { Put(v, 3); }
  void U32(uint32_t v) { Put(v, 4); }
  void U64(uint64_t v) { Put(v, 8); }
  void I64(int64_t v) { Put(static_cast<uint64_t>(v), 8); }
  void Append(ByteView data) { buf().insert(buf().end(), data.begin(), data.end()); }
  void Append(std::string_view text) {
    buf().insert(buf().end(), text.begin(), text.end());
  }
  void Zeros(std::size_t n) { buf().insert(buf().end(), n, 0); }

  // Overwrites a 32-bit big-endian value at an earlier position.
  void PatchU32(std::size_t pos, uint32_t v) {
    for (int i = 0; i < 4; ++i) buf()[pos + i] = static_cast<uint8_t>(v >> (24 - 8 * i));
  }

  std::size_t size() const { return out_ ? out_->size() : own_.size(); }
  Bytes Take() { return std::move(own_); }
  const Bytes& bytes() const { return out_ ? *out_ : own_; }

 private:
  Bytes& buf() { return out_ ? *out_ : own_; }
  void Put(uint64_t v, int n) {
    for (int i = n - 1; i >= 0; --i) buf().push_back(static_cast<uint8_t>(v >> (8 * i)));
  }

  Bytes* out_ = nullptr;
  Bytes own_;
};

// Bounds-checked big-endian reader. Reads past the end throw MalformedError
// carrying the absolute offset (base + position).
class ByteReader {
 public:
  explicit ByteReader(ByteView data, std::size_t base_offset = 0)
      : data_(data), base_(base_offset) {}

  uint8_t U8() { return static_cast<uint8_t>(Get(1)); }
  uint16_t U16() { return static_cast<uint16_t>(Get(2)); }
  uint32_t U24() { return static_cast<uint32_t>(Get(3)); }
  uint32_t U32() { return static_cast<uint32_t>(Get(4)); }
  uint64_t U64() { return Get(8); }
  int64_t I64() { return static_cast<int64_t>(Get(8)); }

  ByteView Take(std::size_t n) {
    Require(n);
    ByteView out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  void Skip(std::size_t n) { Take(n); }

  std::size_t position() const { return pos_; }
  std::size_t absolute_position() const { return base_ + pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  bool empty() const { return remaining() == 0; }

 private:
  void Require(std::size_t n) const {
    if (remaining() < n) throw MalformedError("truncated input", base_ + pos_);
  }
  uint64_t Get(int n) {
    Require(static_cast<std::size_t>(n));
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 8) | data_[pos_ + i];
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  ByteView data_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

inline uint32_t ReadU32At(ByteView data, std::size_t pos) {
  return (uint32_t{data[pos]} << 24) | (uint32_t{data[pos + 1]} << 16) |
         (uint32_t{data[pos + 2]} << 8) | uint32_t{data[pos + 3]};
}

uint32_t Crc32(ByteView data);

}  // namespace rrsb

#endif  // RRSB_COMMON_BYTE_IO_H_
