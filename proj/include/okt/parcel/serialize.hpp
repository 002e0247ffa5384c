#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace okt::parcel {

using Bytes = std::vector<std::uint8_t>;

static_assert(std::endian::native == std::endian::little, "wire encoding assumes a little-endian host");

class SerializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Canonical little-endian, length-prefixed encoding.
class Writer {
 public:
  Writer() = default;
  explicit Writer(Bytes&& reuse) : buf_(std::move(reuse)) { buf_.clear(); }

  template <class T>
  void put(T v) {
    static_assert(std::is_arithmetic_v<T>);
    const auto n = buf_.size();
    buf_.resize(n + sizeof(T));
    std::memcpy(buf_.data() + n, &v, sizeof(T));
  }

  void put_raw(const void* data, std::size_t len) {
    const auto n = buf_.size();
    buf_.resize(n + len);
    if (len != 0) std::memcpy(buf_.data() + n, data, len);
  }

  void put_bytes(std::span<const std::uint8_t> b) {
    put<std::uint64_t>(b.size());
    put_raw(b.data(), b.size());
  }

  void put_string(const std::string& s) {
    put<std::uint64_t>(s.size());
    put_raw(s.data(), s.size());
  }

  template <class T>
  void put_array(std::span<const T> v) {
    static_assert(std::is_arithmetic_v<T>);
    put<std::uint64_t>(v.size());
    put_raw(v.data(), v.size() * sizeof(T));
  }

  template <class T>
  void put_array(const std::vector<T>& v) {
    put_array(std::span<const T>(v));
  }

  std::size_t size() const noexcept { return buf_.size(); }
  Bytes take() && { return std::move(buf_); }
  const Bytes& bytes() const noexcept { return buf_; }

 private:
  Bytes buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  template <class T>
  T get() {
    static_assert(std::is_arithmetic_v<T>);
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  void get_raw(void* out, std::size_t len) {
    need(len);
    if (len != 0) std::memcpy(out, data_.data() + pos_, len);
    pos_ += len;
  }

  Bytes get_bytes() {
    const auto n = length_prefix(1);
    Bytes out(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
              data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }

  std::string get_string() {
    const auto n = length_prefix(1);
    std::string out(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return out;
  }

  template <class T>
  std::vector<T> get_array() {
    static_assert(std::is_arithmetic_v<T>);
    const auto n = length_prefix(sizeof(T));
    std::vector<T> out(n);
    get_raw(out.data(), n * sizeof(T));
    return out;
  }

  // Reads a length-prefixed array into caller storage of exactly `count` items.
  template <class T>
  void get_array_into(T* out, std::size_t count) {
    const auto n = length_prefix(sizeof(T));
    if (n != count) throw SerializationError("array length mismatch");
    get_raw(out, n * sizeof(T));
  }

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }
  bool done() const noexcept { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw SerializationError("truncated buffer");
  }

  std::size_t length_prefix(std::size_t elem) {
    const auto n = get<std::uint64_t>();
    if (n > remaining() / elem) throw SerializationError("length prefix exceeds buffer");
    return static_cast<std::size_t>(n);
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace okt::parcel
