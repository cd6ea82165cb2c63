#pragma once

// Little-endian framing shared by the model container and the embedding
// import file. Readers never hand out partially decoded data: every read is
// bounds-checked and fails with a framing error.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "plad/error.hpp"

namespace plad::binary {

class Writer {
public:
    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

    template <typename T>
    void scalar(T value) {
        static_assert(std::is_arithmetic_v<T>);
        std::uint8_t raw[sizeof(T)];
        std::memcpy(raw, &value, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
        out_.insert(out_.end(), raw, raw + sizeof(T));
    }

    void u8(std::uint8_t v) { scalar(v); }
    void u16(std::uint16_t v) { scalar(v); }
    void u32(std::uint32_t v) { scalar(v); }
    void u64(std::uint64_t v) { scalar(v); }
    void f64(double v) { scalar(v); }

    void string(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.insert(out_.end(), s.begin(), s.end());
    }

    /// u64 element count followed by float32 values.
    void floats(std::span<const float> values) {
        u64(values.size());
        for (float v : values) scalar(v);
    }

    std::vector<std::uint8_t>& buffer() { return out_; }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }

    std::span<const std::uint8_t> bytes(std::size_t n) {
        need(n);
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    template <typename T>
    T scalar() {
        need(sizeof(T));
        std::uint8_t raw[sizeof(T)];
        std::memcpy(raw, data_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
        pos_ += sizeof(T);
        T value;
        std::memcpy(&value, raw, sizeof(T));
        return value;
    }

    std::uint8_t u8() { return scalar<std::uint8_t>(); }
    std::uint16_t u16() { return scalar<std::uint16_t>(); }
    std::uint32_t u32() { return scalar<std::uint32_t>(); }
    std::uint64_t u64() { return scalar<std::uint64_t>(); }
    double f64() { return scalar<double>(); }

    std::string string() {
        const auto n = u32();
        const auto b = bytes(n);
        return std::string(b.begin(), b.end());
    }

    std::vector<float> floats() {
        const auto n = u64();
        if (n > remaining() / sizeof(float)) fail(ErrorKind::Framing, "float array length exceeds data");
        std::vector<float> out(static_cast<std::size_t>(n));
        for (auto& v : out) v = scalar<float>();
        return out;
    }

private:
    void need(std::size_t n) const {
        if (n > remaining())
            fail(ErrorKind::Framing, "truncated data at byte " + std::to_string(pos_) + " (need " +
                                         std::to_string(n) + ", have " + std::to_string(remaining()) + ")");
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

/// CRC-32 (zlib polynomial) of `data`.
std::uint32_t crc32(std::span<const std::uint8_t> data);

}  // namespace plad::binary
