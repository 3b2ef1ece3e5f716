// Copyright 2026 The clusterfetch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLUSTERFETCH_BYTES_HPP_
#define CLUSTERFETCH_BYTES_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "clusterfetch/error.hpp"

namespace clusterfetch {

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

using Bytes = std::vector<std::uint8_t>;

// Appends little-endian fixed-width values to a growing buffer.
class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(Bytes initial) : buf_(std::move(initial)) {}

  template <class T>
    requires std::is_arithmetic_v<T>
  void put(T value) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }

  template <class T>
    requires std::is_arithmetic_v<T>
  void put_span(std::span<const T> values) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
    buf_.insert(buf_.end(), p, p + values.size_bytes());
  }

  void put_bytes(std::span<const std::uint8_t> bytes) {
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
  }

  void put_string(std::string_view s) {
    buf_.insert(buf_.end(), s.begin(), s.end());
  }

  void reserve(std::size_t n) { buf_.reserve(buf_.size() + n); }
  std::size_t size() const { return buf_.size(); }
  Bytes& bytes() { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

// Bounds-checked little-endian reader. Every underrun throws `Error` with
// the code supplied at construction, so callers pick the failure class
// (truncated file, malformed frame, bad framing).
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, ErrorCode underrun)
      : data_(data), underrun_(underrun) {}

  template <class T>
    requires std::is_arithmetic_v<T>
  T get() {
    require(sizeof(T));
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  template <class T>
    requires std::is_arithmetic_v<T>
  void get_into(std::span<T> out) {
    require(out.size_bytes());
    std::memcpy(out.data(), data_.data() + pos_, out.size_bytes());
    pos_ += out.size_bytes();
  }

  std::span<const std::uint8_t> get_bytes(std::size_t n) {
    require(n);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::string get_string(std::size_t n) {
    auto s = get_bytes(n);
    return std::string(s.begin(), s.end());
  }

  // Checks that `count` items of `width` bytes fit before allocating for them.
  void require_items(std::uint64_t count, std::size_t width) const {
    if (width != 0 && count > remaining() / width) fail(count * width);
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  void require(std::size_t n) const {
    if (n > remaining()) fail(n);
  }
  [[noreturn]] void fail(std::uint64_t wanted) const {
    throw Error(underrun_, "needed " + std::to_string(wanted) +
                               " bytes at offset " + std::to_string(pos_) +
                               ", " + std::to_string(remaining()) +
                               " remain");
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  ErrorCode underrun_;
};

}  // namespace clusterfetch

#endif  // CLUSTERFETCH_BYTES_HPP_
