#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mzrl/bitio.hpp"
#include "mzrl/theory.hpp"

namespace mzrl {

// One decoded codeword: `zeros` source zeros, then a one unless the
// codeword marks a full zero segment.
struct ZeroRunMessage {
    uint32_t index = 0;
    uint32_t zeros = 0;
    bool terminated = false;  // true when the message ends with a one

    uint64_t source_bits() const { return zeros + (terminated ? 1u : 0u); }
};

// Streaming zero-run encoder with O(1) state: a single zero counter.
class Encoder {
public:
    explicit Encoder(CodeParams params) : params_(params) {}

    // Feeds one source bit; returns the codeword it completes, if any.
    // A one emits c_{counter}; the (n-1)th consecutive zero emits c_{n-1}.
    std::optional<uint32_t> push(bool bit) {
        if (bit) {
            const uint32_t word = zero_counter_;
            zero_counter_ = 0;
            return word;
        }
        if (++zero_counter_ == params_.n - 1) {
            zero_counter_ = 0;
            return params_.n - 1;
        }
        return std::nullopt;
    }

    // Ends a finite input: a pending run of j zeros goes out as c_j and
    // the decoder drops the implied trailing one via the header bit count.
    std::optional<uint32_t> finish() {
        if (zero_counter_ == 0) return std::nullopt;
        const uint32_t word = zero_counter_;
        zero_counter_ = 0;
        return word;
    }

    uint32_t zero_counter() const { return zero_counter_; }
    const CodeParams& params() const { return params_; }

private:
    CodeParams params_;
    uint32_t zero_counter_ = 0;
};

// Maps a codeword value back to its source message. Values in
// [n, 2^k) never appear on a valid wire and raise StreamError.
ZeroRunMessage decode_codeword(uint32_t value, const CodeParams& params);

// Container for a finite encoded stream.
//
//   magic "MZRL" | version u8 | n u32 BE | source_bit_count u64 BE |
//   codeword_count u64 BE | payload
//
// The payload packs codewords k bits each, MSB-first, zero-padded to a
// byte boundary.
struct CodewordStream {
    static constexpr std::array<uint8_t, 4> kMagic{'M', 'Z', 'R', 'L'};
    static constexpr uint8_t kVersion = 1;
    static constexpr std::size_t kHeaderBytes = 25;

    CodeParams params{};
    uint64_t source_bit_count = 0;
    uint64_t codeword_count = 0;
    std::vector<uint8_t> payload;

    std::vector<uint8_t> serialize() const;
    static CodewordStream parse(std::span<const uint8_t> bytes);

    static uint64_t payload_bytes_for(uint64_t codeword_count, uint32_t k) {
        return (codeword_count * k + 7) / 8;
    }
};

CodewordStream encode_stream(const BitSequence& bits, CodeParams params);
BitSequence decode_stream(const CodewordStream& stream);

// Traffic of the index-announcement baseline: each detection inside a
// frame of `frame_size` pulses costs ceil(log2 frame_size) bits. Every
// frame uses the same index width, so the per-frame sums collapse to
// ones * width.
uint64_t baseline_position_bits(const BitSequence& bits, uint64_t frame_size);

}  // namespace mzrl
