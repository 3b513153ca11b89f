#include "rxgov/codec.hpp"

namespace rxgov {

void ByteWriter::u16(uint16_t v) {
    buf_.push_back(static_cast<uint8_t>(v >> 8));
    buf_.push_back(static_cast<uint8_t>(v));
}

void ByteWriter::u32(uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8)
        buf_.push_back(static_cast<uint8_t>(v >> shift));
}

void ByteWriter::u64(uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        buf_.push_back(static_cast<uint8_t>(v >> shift));
}

void ByteWriter::blob(std::span<const uint8_t> bytes) {
    if (bytes.size() > 0xffffffffull) throw std::length_error("blob too large");
    u32(static_cast<uint32_t>(bytes.size()));
    raw(bytes);
}

void ByteWriter::str(std::string_view s) {
    blob(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
}

uint8_t ByteReader::u8() {
    if (remaining() < 1) throw DecodeError("truncated u8");
    return data_[pos_++];
}

uint16_t ByteReader::u16() {
    if (remaining() < 2) throw DecodeError("truncated u16");
    uint16_t v = static_cast<uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
    pos_ += 2;
    return v;
}

uint32_t ByteReader::u32() {
    if (remaining() < 4) throw DecodeError("truncated u32");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_ + i];
    pos_ += 4;
    return v;
}

uint64_t ByteReader::u64() {
    if (remaining() < 8) throw DecodeError("truncated u64");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | data_[pos_ + i];
    pos_ += 8;
    return v;
}

Bytes ByteReader::raw(size_t n) {
    if (remaining() < n) throw DecodeError("truncated bytes");
    Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return out;
}

Bytes ByteReader::blob() {
    uint32_t n = u32();
    return raw(n);
}

std::string ByteReader::str() {
    Bytes b = blob();
    return std::string(b.begin(), b.end());
}

void ByteReader::expect_done() const {
    if (!done()) throw DecodeError("trailing bytes after decode");
}

static constexpr char kHexDigits[] = "0123456789abcdef";

std::string to_hex(std::span<const uint8_t> bytes) {
    std::string out;
    out.reserve(bytes.size() * 2);
    for (uint8_t b : bytes) {
        out.push_back(kHexDigits[b >> 4]);
        out.push_back(kHexDigits[b & 0xf]);
    }
    return out;
}

std::string to_hex(const Bytes& bytes) { return to_hex(std::span<const uint8_t>(bytes)); }

// Lowercase only: one canonical spelling per byte string keeps encode and
// decode a bijection, so no two distinct files decode to the same chain.
static int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw DecodeError("odd-length hex string");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_nibble(hex[i]);
        int lo = hex_nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) throw DecodeError("invalid hex character");
        out.push_back(static_cast<uint8_t>(hi << 4 | lo));
    }
    return out;
}

}  // namespace rxgov
