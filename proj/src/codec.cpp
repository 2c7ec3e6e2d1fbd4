#include "mzrl/codec.hpp"

#include <algorithm>
#include <string>

#include "mzrl/errors.hpp"

namespace mzrl {

ZeroRunMessage decode_codeword(uint32_t value, const CodeParams& params) {
    if (value >= params.n)
        throw StreamError("codeword value " + std::to_string(value) +
                          " outside alphabet of size " + std::to_string(params.n));
    if (value == params.n - 1) return ZeroRunMessage{value, params.n - 1, false};
    return ZeroRunMessage{value, value, true};
}

std::vector<uint8_t> CodewordStream::serialize() const {
    std::vector<uint8_t> out;
    out.reserve(kHeaderBytes + payload.size());
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    out.push_back(kVersion);
    detail::put_u32_be(out, params.n);
    detail::put_u64_be(out, source_bit_count);
    detail::put_u64_be(out, codeword_count);
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

CodewordStream CodewordStream::parse(std::span<const uint8_t> bytes) {
    if (bytes.size() < kHeaderBytes)
        throw StreamError("container shorter than the 25-byte header");
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
        throw StreamError("bad magic, expected \"MZRL\"");
    if (bytes[4] != kVersion)
        throw StreamError("unsupported version " + std::to_string(bytes[4]));

    CodewordStream stream;
    const uint32_t n = detail::get_u32_be(bytes, 5);
    if (n < 2) throw StreamError("bad header field n: " + std::to_string(n));
    stream.params = CodeParams::from_alphabet_size(n);
    stream.source_bit_count = detail::get_u64_be(bytes, 9);
    stream.codeword_count = detail::get_u64_be(bytes, 17);

    if (stream.codeword_count > (UINT64_MAX - 7) / stream.params.k)
        throw StreamError("payload length mismatch: codeword count overflows");
    const uint64_t expected = payload_bytes_for(stream.codeword_count, stream.params.k);
    const uint64_t actual = bytes.size() - kHeaderBytes;
    if (actual != expected)
        throw StreamError("payload length mismatch: expected " +
                          std::to_string(expected) + " bytes, got " +
                          std::to_string(actual));
    stream.payload.assign(bytes.begin() + kHeaderBytes, bytes.end());
    return stream;
}

CodewordStream encode_stream(const BitSequence& bits, CodeParams params) {
    Encoder encoder(params);
    BitWriter payload;
    uint64_t words = 0;
    for (uint64_t i = 0; i < bits.size(); ++i) {
        if (const auto word = encoder.push(bits[i])) {
            payload.append(*word, params.k);
            ++words;
        }
    }
    if (const auto word = encoder.finish()) {
        payload.append(*word, params.k);
        ++words;
    }
    payload.align_to_byte();

    CodewordStream stream;
    stream.params = params;
    stream.source_bit_count = bits.size();
    stream.codeword_count = words;
    stream.payload = std::move(payload).take_bytes();
    return stream;
}

BitSequence decode_stream(const CodewordStream& stream) {
    const uint64_t expected = CodewordStream::payload_bytes_for(
        stream.codeword_count, stream.params.k);
    if (stream.payload.size() != expected)
        throw StreamError("payload length mismatch: expected " +
                          std::to_string(expected) + " bytes, got " +
                          std::to_string(stream.payload.size()));

    BitReader reader(stream.payload);
    BitSequence out;
    out.reserve(stream.source_bit_count);
    for (uint64_t j = 0; j < stream.codeword_count; ++j) {
        ZeroRunMessage msg;
        try {
            msg = decode_codeword(static_cast<uint32_t>(reader.read(stream.params.k)),
                                  stream.params);
        } catch (const StreamError& e) {
            throw StreamError(std::string(e.what()) + " at codeword offset " +
                              std::to_string(j));
        }
        out.append_zeros(msg.zeros);
        if (msg.terminated) out.push_back(true);
        // A codeword before the last must still leave source bits to cover.
        if (j + 1 < stream.codeword_count && out.size() >= stream.source_bit_count)
            throw StreamError("expansion reaches the source bit count at codeword offset " +
                              std::to_string(j));
    }
    if (out.size() < stream.source_bit_count)
        throw StreamError("source bits missing: stream truncated");
    // The final codeword may overshoot by the implied one of a flushed
    // partial run; the header bit count is authoritative.
    out.truncate(stream.source_bit_count);
    return out;
}

uint64_t baseline_position_bits(const BitSequence& bits, uint64_t frame_size) {
    if (frame_size < 2) throw std::invalid_argument("frame size must be at least 2");
    return bits.count_ones() * codeword_width(frame_size);
}

}  // namespace mzrl
