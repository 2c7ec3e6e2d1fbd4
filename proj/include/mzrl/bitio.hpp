#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace mzrl {

// MSB-first bit packer: the first bit appended lands in the most
// significant free bit of the current byte; multi-bit values are written
// high bit first.
class BitWriter {
public:
    void append(uint64_t value, uint32_t nbits) {
        if (nbits > 64) throw std::invalid_argument("at most 64 bits per append");
        if (nbits > 32) {
            append(value >> 32, nbits - 32);
            nbits = 32;
            value &= 0xFFFFFFFFull;
        }
        if (nbits == 0) return;
        acc_ = (acc_ << nbits) | (value & ((uint64_t{1} << nbits) - 1));
        filled_ += nbits;
        total_bits_ += nbits;
        while (filled_ >= 8) {
            filled_ -= 8;
            bytes_.push_back(static_cast<uint8_t>(acc_ >> filled_));
        }
    }

    // Zero-pads the trailing partial byte, if any. Padding does not
    // count towards bit_count().
    void align_to_byte() {
        if (filled_ == 0) return;
        bytes_.push_back(static_cast<uint8_t>(acc_ << (8 - filled_)));
        filled_ = 0;
    }

    // Bits appended so far, excluding padding.
    uint64_t bit_count() const { return total_bits_; }

    // Completed bytes; a partial byte stays in the accumulator until
    // align_to_byte().
    const std::vector<uint8_t>& bytes() const& { return bytes_; }
    std::vector<uint8_t> take_bytes() && { return std::move(bytes_); }

private:
    std::vector<uint8_t> bytes_;
    uint64_t acc_ = 0;
    uint32_t filled_ = 0;
    uint64_t total_bits_ = 0;
};

// MSB-first reader over a byte span.
class BitReader {
public:
    explicit BitReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

    uint64_t remaining() const { return bytes_.size() * 8 - pos_; }
    uint64_t position() const { return pos_; }

    uint64_t read(uint32_t nbits) {
        if (nbits > 57) throw std::invalid_argument("at most 57 bits per read");
        if (nbits > remaining()) throw std::out_of_range("bit reader exhausted");
        uint64_t value = 0;
        uint32_t need = nbits;
        while (need > 0) {
            const uint32_t offset = static_cast<uint32_t>(pos_ & 7);
            const uint32_t avail = 8 - offset;
            const uint32_t take = need < avail ? need : avail;
            const uint8_t byte = bytes_[pos_ >> 3];
            const uint8_t chunk =
                static_cast<uint8_t>(byte >> (avail - take)) & ((1u << take) - 1u);
            value = (value << take) | chunk;
            pos_ += take;
            need -= take;
        }
        return value;
    }

private:
    std::span<const uint8_t> bytes_;
    uint64_t pos_ = 0;
};

// Packed bit string (MSB-first within each byte). Bits past size() in
// the last byte are kept zero, so equality is plain member equality.
class BitSequence {
public:
    BitSequence() = default;

    static BitSequence from_bytes(std::vector<uint8_t> bytes, uint64_t bit_count) {
        if (bit_count > bytes.size() * 8)
            throw std::invalid_argument("bit count exceeds provided bytes");
        BitSequence seq;
        seq.bytes_ = std::move(bytes);
        seq.bit_count_ = bit_count;
        seq.bytes_.resize((bit_count + 7) / 8);
        seq.mask_tail();
        return seq;
    }

    void reserve(uint64_t bits) { bytes_.reserve((bits + 7) / 8); }

    void push_back(bool bit) {
        const uint32_t offset = static_cast<uint32_t>(bit_count_ & 7);
        if (offset == 0) bytes_.push_back(0);
        if (bit) bytes_.back() |= static_cast<uint8_t>(0x80u >> offset);
        ++bit_count_;
    }

    void append_zeros(uint64_t count) {
        bit_count_ += count;
        bytes_.resize((bit_count_ + 7) / 8, 0);
    }

    void truncate(uint64_t new_count) {
        if (new_count > bit_count_) throw std::invalid_argument("cannot grow via truncate");
        bit_count_ = new_count;
        bytes_.resize((bit_count_ + 7) / 8);
        mask_tail();
    }

    bool operator[](uint64_t i) const {
        return (bytes_[i >> 3] >> (7 - (i & 7))) & 1u;
    }

    uint64_t size() const { return bit_count_; }
    bool empty() const { return bit_count_ == 0; }
    const std::vector<uint8_t>& bytes() const { return bytes_; }

    uint64_t count_ones() const {
        uint64_t ones = 0;
        for (uint8_t b : bytes_) ones += std::popcount(b);
        return ones;
    }

    friend bool operator==(const BitSequence&, const BitSequence&) = default;

private:
    void mask_tail() {
        const uint32_t offset = static_cast<uint32_t>(bit_count_ & 7);
        if (offset != 0 && !bytes_.empty())
            bytes_.back() &= static_cast<uint8_t>(0xFF00u >> offset);
    }

    std::vector<uint8_t> bytes_;
    uint64_t bit_count_ = 0;
};

namespace detail {

inline void put_u32_be(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

inline void put_u64_be(std::vector<uint8_t>& out, uint64_t v) {
    put_u32_be(out, static_cast<uint32_t>(v >> 32));
    put_u32_be(out, static_cast<uint32_t>(v));
}

inline uint32_t get_u32_be(std::span<const uint8_t> in, std::size_t pos) {
    return (uint32_t{in[pos]} << 24) | (uint32_t{in[pos + 1]} << 16) |
           (uint32_t{in[pos + 2]} << 8) | uint32_t{in[pos + 3]};
}

inline uint64_t get_u64_be(std::span<const uint8_t> in, std::size_t pos) {
    return (uint64_t{get_u32_be(in, pos)} << 32) | get_u32_be(in, pos + 4);
}

}  // namespace detail

}  // namespace mzrl
