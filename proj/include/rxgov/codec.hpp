#pragma once

// Canonical byte encoding used for everything that gets hashed, signed, or
// stored on-chain: fixed-width big-endian integers, length-prefixed byte
// strings, fixed field order. Encodings must be platform-independent so
// state roots and signatures agree across machines.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rxgov {

using Bytes = std::vector<uint8_t>;

struct DecodeError : std::runtime_error {
    explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u16(uint16_t v);
    void u32(uint32_t v);
    void u64(uint64_t v);
    void raw(std::span<const uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }
    void raw(const Bytes& bytes) { raw(std::span<const uint8_t>(bytes)); }
    // u32 length prefix + payload
    void blob(std::span<const uint8_t> bytes);
    void blob(const Bytes& bytes) { blob(std::span<const uint8_t>(bytes)); }
    void str(std::string_view s);
    template <size_t N>
    void fixed(const std::array<uint8_t, N>& a) { raw(std::span<const uint8_t>(a.data(), N)); }

    const Bytes& bytes() const { return buf_; }
    Bytes take() { return std::move(buf_); }

private:
    Bytes buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

    uint8_t u8();
    uint16_t u16();
    uint32_t u32();
    uint64_t u64();
    Bytes blob();
    std::string str();
    Bytes raw(size_t n);
    template <size_t N>
    std::array<uint8_t, N> fixed() {
        auto b = raw(N);
        std::array<uint8_t, N> out{};
        std::copy(b.begin(), b.end(), out.begin());
        return out;
    }

    size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }
    // Decoders call this last so trailing garbage is rejected.
    void expect_done() const;

private:
    std::span<const uint8_t> data_;
    size_t pos_ = 0;
};

std::string to_hex(std::span<const uint8_t> bytes);
std::string to_hex(const Bytes& bytes);
Bytes from_hex(std::string_view hex);  // lowercase only, throws DecodeError on bad input

}  // namespace rxgov
