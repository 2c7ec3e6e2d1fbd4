#include "mzrl/sifter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "mzrl/errors.hpp"

namespace mzrl {

// ---------------------------------------------------------------- BobEndpoint

BobEndpoint::BobEndpoint(CodeParams params, WordSink sink)
    : params_(params), encoder_(params), sink_(std::move(sink)) {}

void BobEndpoint::process(const OriginalKeyRecord& record) {
    if (finished_) throw ProtocolError("Bob endpoint already finished");
    ++pulses_;
    if (record.detected) ++detected_;
    if (const auto word = encoder_.push(record.detected)) {
        ++codewords_;
        sink_(*word);
    }
}

SessionFinish BobEndpoint::finish() {
    if (finished_) throw ProtocolError("Bob endpoint already finished");
    finished_ = true;
    SessionFinish fin;
    fin.flush_word = encoder_.finish();
    if (fin.flush_word) ++codewords_;
    fin.source_bit_count = pulses_;
    fin.codeword_count = codewords_;
    return fin;
}

// -------------------------------------------------------------- AliceEndpoint

AliceEndpoint::AliceEndpoint(CodeParams params, RefillFn refill)
    : params_(params), refill_(std::move(refill)) {}

void AliceEndpoint::buffer_original(uint64_t index, uint8_t key_bits) {
    if (index != next_index_)
        throw ProtocolError("original keys must be buffered in pulse order");
    ++next_index_;
    buffer_.push_back(key_bits);
    peak_ = std::max<uint64_t>(peak_, buffer_.size());
}

void AliceEndpoint::ensure_available(uint64_t need) {
    if (buffer_.size() >= need) return;
    if (refill_) refill_(*this, need - buffer_.size());
    if (buffer_.size() < need)
        throw ProtocolError("buffer underflow: codeword covers " +
                            std::to_string(need) + " originals, only " +
                            std::to_string(buffer_.size()) + " buffered");
}

std::optional<RetainedKey> AliceEndpoint::on_codeword(uint32_t value) {
    if (finished_) throw ProtocolError("session already finished");
    const ZeroRunMessage msg = decode_codeword(value, params_);
    const uint64_t need = msg.source_bits();
    ensure_available(need);
    ++words_seen_;
    consumed_ += need;
    buffer_.erase(buffer_.begin(), buffer_.begin() + msg.zeros);
    head_index_ += msg.zeros;
    if (!msg.terminated) return std::nullopt;
    const RetainedKey key{head_index_, buffer_.front()};
    buffer_.pop_front();
    ++head_index_;
    retained_.push_back(key);
    return key;
}

void AliceEndpoint::on_finish(const SessionFinish& finish) {
    if (finished_) throw ProtocolError("session already finished");
    if (finish.flush_word) {
        const ZeroRunMessage msg = decode_codeword(*finish.flush_word, params_);
        if (!msg.terminated)
            throw ProtocolError("flush word cannot be the all-zero segment");
        if (finish.source_bit_count < consumed_)
            throw ProtocolError("source bit count below originals already consumed");
        const uint64_t remaining = finish.source_bit_count - consumed_;
        // The trailing one of a flush word is implied, not a real pulse:
        // the word covers exactly the leftover undetected originals.
        if (msg.zeros != remaining)
            throw ProtocolError("flush word covers " + std::to_string(msg.zeros) +
                                " originals, session leaves " +
                                std::to_string(remaining));
        ensure_available(remaining);
        ++words_seen_;
        consumed_ += remaining;
        buffer_.erase(buffer_.begin(), buffer_.begin() + remaining);
        head_index_ += remaining;
    }
    if (consumed_ != finish.source_bit_count)
        throw ProtocolError("source bit count mismatch at session end");
    if (words_seen_ != finish.codeword_count)
        throw ProtocolError("codeword count mismatch at session end");
    finished_ = true;
}

// ----------------------------------------------------------------- WireWriter

void WireWriter::start(std::vector<uint8_t>& out) {
    if (started_) throw ProtocolError("wire session already started");
    started_ = true;
    CodewordStream header;
    header.params = params_;  // counts stay zero until the trailer
    const auto bytes = header.serialize();
    out.insert(out.end(), bytes.begin(), bytes.end());
}

void WireWriter::word(uint32_t value, std::vector<uint8_t>& out) {
    if (!started_ || finished_) throw ProtocolError("wire session not active");
    packer_.append(value, params_.k);
    drain(out);
}

void WireWriter::finish(const SessionFinish& fin, std::vector<uint8_t>& out) {
    if (!started_ || finished_) throw ProtocolError("wire session not active");
    finished_ = true;
    if (fin.flush_word) packer_.append(*fin.flush_word, params_.k);
    packer_.align_to_byte();
    drain(out);
    out.push_back(fin.flush_word ? 1 : 0);
    detail::put_u64_be(out, fin.source_bit_count);
    detail::put_u64_be(out, fin.codeword_count);
}

void WireWriter::drain(std::vector<uint8_t>& out) {
    const auto& bytes = packer_.bytes();
    out.insert(out.end(), bytes.begin() + drained_, bytes.end());
    drained_ = bytes.size();
}

// ----------------------------------------------------------------- WireReader

WireReader::WireReader(Callbacks callbacks) : callbacks_(std::move(callbacks)) {}

uint32_t WireReader::word_at(uint64_t word_index) const {
    const uint64_t bitpos = word_index * params_.k;
    uint64_t pos = payload_offset_ * 8 + bitpos;
    uint32_t need = params_.k;
    uint32_t value = 0;
    while (need > 0) {
        const uint32_t offset = static_cast<uint32_t>(pos & 7);
        const uint32_t avail = 8 - offset;
        const uint32_t take = need < avail ? need : avail;
        const uint8_t byte = buf_[pos >> 3];
        const uint8_t chunk =
            static_cast<uint8_t>(byte >> (avail - take)) & ((1u << take) - 1u);
        value = (value << take) | chunk;
        pos += take;
        need -= take;
    }
    return value;
}

void WireReader::deliver_through(uint64_t safe_payload_bytes) {
    const uint64_t safe_bits = safe_payload_bytes * 8;
    while ((delivered_ + 1) * params_.k <= safe_bits) {
        callbacks_.on_word(word_at(delivered_));
        ++delivered_;
    }
}

void WireReader::feed(std::span<const uint8_t> chunk) {
    if (closed_) throw ProtocolError("wire stream already closed");
    buf_.insert(buf_.end(), chunk.begin(), chunk.end());
    if (!header_done_) {
        if (buf_.size() < CodewordStream::kHeaderBytes) return;
        if (!std::equal(CodewordStream::kMagic.begin(), CodewordStream::kMagic.end(),
                        buf_.begin()))
            throw ProtocolError("bad magic on session start");
        if (buf_[4] != CodewordStream::kVersion)
            throw ProtocolError("unsupported wire version " + std::to_string(buf_[4]));
        const uint32_t n = detail::get_u32_be(buf_, 5);
        if (n < 2) throw ProtocolError("bad alphabet size on session start");
        params_ = CodeParams::from_alphabet_size(n);
        payload_offset_ = CodewordStream::kHeaderBytes;
        header_done_ = true;
        callbacks_.on_start(params_);
    }
    // Everything beyond the possible trailer region is settled payload.
    const uint64_t received = buf_.size() - payload_offset_;
    if (received > kWireTrailerBytes) deliver_through(received - kWireTrailerBytes);
}

void WireReader::close() {
    if (closed_) throw ProtocolError("wire stream already closed");
    closed_ = true;
    if (!header_done_) throw ProtocolError("stream closed before the session header");
    const uint64_t received = buf_.size() - payload_offset_;
    if (received < kWireTrailerBytes)
        throw ProtocolError("stream closed inside the session trailer");

    const std::size_t trailer = buf_.size() - kWireTrailerBytes;
    const uint8_t has_flush = buf_[trailer];
    if (has_flush > 1) throw ProtocolError("bad flush flag in session trailer");
    SessionFinish fin;
    fin.source_bit_count = detail::get_u64_be(buf_, trailer + 1);
    fin.codeword_count = detail::get_u64_be(buf_, trailer + 9);

    const uint64_t payload_bytes = received - kWireTrailerBytes;
    if (fin.codeword_count > (std::numeric_limits<uint64_t>::max() - 7) / params_.k ||
        payload_bytes != CodewordStream::payload_bytes_for(fin.codeword_count, params_.k))
        throw ProtocolError("payload length mismatch at session end");

    const uint64_t regular = fin.codeword_count - (has_flush ? 1 : 0);
    if (delivered_ > regular)
        throw ProtocolError("more codewords on the wire than the trailer declares");
    while (delivered_ < regular) {
        callbacks_.on_word(word_at(delivered_));
        ++delivered_;
    }
    if (has_flush) fin.flush_word = word_at(fin.codeword_count - 1);
    callbacks_.on_finish(fin);
}

// ---------------------------------------------------------------- PulseSource

PulseSource::PulseSource(uint64_t seed, double q) : rng_(seed) {
    if (!(q > 0.0 && q < 1.0) && q != 0.0)
        throw std::domain_error("count rate must lie in [0, 1)");
    const long double scaled = std::ldexp(static_cast<long double>(q), 64);
    threshold_ = scaled >= static_cast<long double>(std::numeric_limits<uint64_t>::max())
                     ? std::numeric_limits<uint64_t>::max()
                     : static_cast<uint64_t>(scaled);
}

OriginalKeyRecord PulseSource::next() {
    OriginalKeyRecord record;
    record.index = next_index_++;
    record.detected = rng_() < threshold_;
    record.key_bits = static_cast<uint8_t>(rng_() & 1u);
    return record;
}

// -------------------------------------------------------------------- drivers

namespace {

uint64_t delivery_delay_ticks(const LinkBudget& link) {
    const double latency = link.pipeline_latency_s();
    if (latency <= 0.0) return 0;
    if (!(link.t_rf_s > 0.0))
        throw std::invalid_argument("latencies need a positive repetition period");
    return static_cast<uint64_t>(std::ceil(latency / link.t_rf_s));
}

void validate_session(const SessionConfig& config) {
    if (config.pulses > 0 && !(config.q > 0.0 && config.q < 1.0))
        throw std::domain_error("count rate must lie in (0, 1)");
    if (config.params.n < 2) throw std::invalid_argument("alphabet size must be at least 2");
}

SiftingReport make_report(const SessionConfig& config, uint64_t code_bits,
                          uint64_t raw_keys, uint64_t buffer_peak) {
    SiftingReport report;
    report.source_bits = config.pulses;
    report.code_bits_sent = code_bits;
    report.raw_keys = raw_keys;
    report.buffer_peak = buffer_peak;
    if (config.pulses == 0) return report;
    report.empirical_codelength =
        static_cast<double>(code_bits) / static_cast<double>(config.pulses);
    report.empirical_efficiency =
        report.empirical_codelength / binary_entropy(config.q);
    // Efficiency can dip below one on degenerate short sessions where the
    // flush word amortizes over almost the whole input; the consumption
    // formula floors it at the entropy cost.
    report.key_consumption_bits =
        key_consumption(config.pulses, config.q,
                        std::max(1.0, report.empirical_efficiency), config.budget);
    return report;
}

// Unbounded byte-chunk queue for the two-thread driver.
class ByteQueue {
public:
    void push(std::vector<uint8_t> chunk) {
        {
            std::lock_guard lock(mutex_);
            chunks_.push_back(std::move(chunk));
        }
        ready_.notify_one();
    }

    void close() {
        {
            std::lock_guard lock(mutex_);
            closed_ = true;
        }
        ready_.notify_one();
    }

    // Empty optional means the writer closed the stream.
    std::optional<std::vector<uint8_t>> pop() {
        std::unique_lock lock(mutex_);
        ready_.wait(lock, [&] { return !chunks_.empty() || closed_; });
        if (chunks_.empty()) return std::nullopt;
        auto chunk = std::move(chunks_.front());
        chunks_.pop_front();
        return chunk;
    }

private:
    std::mutex mutex_;
    std::condition_variable ready_;
    std::deque<std::vector<uint8_t>> chunks_;
    bool closed_ = false;
};

}  // namespace

SessionResult run_session(const SessionConfig& config) {
    validate_session(config);
    SessionResult result;
    const uint64_t delay = delivery_delay_ticks(config.link);

    PulseSource source(config.seed, config.q);
    WireWriter wire(config.params);
    wire.start(result.traffic);
    AliceEndpoint alice(config.params);

    uint64_t tick = 0;
    std::deque<std::pair<uint64_t, uint32_t>> in_flight;  // (delivery tick, word)
    BobEndpoint bob(config.params, [&](uint32_t word) {
        wire.word(word, result.traffic);
        in_flight.emplace_back(tick + delay, word);
    });

    for (tick = 0; tick < config.pulses; ++tick) {
        const OriginalKeyRecord record = source.next();
        if (record.detected) result.detected_indexes.push_back(record.index);
        alice.buffer_original(record.index, record.key_bits);
        bob.process(record);
        while (!in_flight.empty() && in_flight.front().first <= tick) {
            alice.on_codeword(in_flight.front().second);
            in_flight.pop_front();
        }
    }
    const SessionFinish fin = bob.finish();
    wire.finish(fin, result.traffic);
    while (!in_flight.empty()) {
        alice.on_codeword(in_flight.front().second);
        in_flight.pop_front();
    }
    alice.on_finish(fin);

    result.report =
        make_report(config, bob.code_bits(), alice.retained().size(), alice.buffer_peak());
    result.retained = alice.take_retained();
    return result;
}

SessionResult run_session_concurrent(const SessionConfig& config) {
    validate_session(config);
    SessionResult result;
    ByteQueue channel;
    std::exception_ptr bob_error;
    uint64_t bob_code_bits = 0;

    std::thread bob_thread([&] {
        try {
            PulseSource source(config.seed, config.q);
            WireWriter wire(config.params);
            std::vector<uint8_t> chunk;
            wire.start(chunk);
            result.traffic.insert(result.traffic.end(), chunk.begin(), chunk.end());
            channel.push(std::move(chunk));

            BobEndpoint bob(config.params, [&](uint32_t word) {
                std::vector<uint8_t> bytes;
                wire.word(word, bytes);
                if (bytes.empty()) return;  // word did not complete a byte
                result.traffic.insert(result.traffic.end(), bytes.begin(), bytes.end());
                channel.push(std::move(bytes));
            });
            for (uint64_t t = 0; t < config.pulses; ++t) {
                const OriginalKeyRecord record = source.next();
                if (record.detected) result.detected_indexes.push_back(record.index);
                bob.process(record);
            }
            const SessionFinish fin = bob.finish();
            std::vector<uint8_t> tail;
            wire.finish(fin, tail);
            result.traffic.insert(result.traffic.end(), tail.begin(), tail.end());
            channel.push(std::move(tail));
            bob_code_bits = bob.code_bits();
        } catch (...) {
            bob_error = std::current_exception();
        }
        channel.close();
    });

    std::exception_ptr alice_error;
    PulseSource alice_source(config.seed, config.q);
    AliceEndpoint alice(config.params, [&](AliceEndpoint& self, uint64_t needed) {
        // Alice owns the original keys; she materializes them on demand
        // from her copy of the pulse stream.
        for (uint64_t i = 0; i < needed; ++i) {
            const OriginalKeyRecord record = alice_source.next();
            self.buffer_original(record.index, record.key_bits);
        }
    });
    try {
        WireReader reader({
            [&](CodeParams params) {
                if (!(params == config.params))
                    throw ProtocolError("session header disagrees with the configuration");
            },
            [&](uint32_t word) { alice.on_codeword(word); },
            [&](const SessionFinish& fin) {
                // Materialize the tail originals the flush word covers.
                while (alice.consumed() + alice.buffered() < fin.source_bit_count) {
                    const OriginalKeyRecord record = alice_source.next();
                    alice.buffer_original(record.index, record.key_bits);
                }
                alice.on_finish(fin);
            },
        });
        while (auto chunk = channel.pop()) reader.feed(*chunk);
        if (!bob_error) reader.close();
    } catch (...) {
        alice_error = std::current_exception();
    }

    bob_thread.join();
    if (bob_error) std::rethrow_exception(bob_error);
    if (alice_error) std::rethrow_exception(alice_error);

    result.report =
        make_report(config, bob_code_bits, alice.retained().size(), alice.buffer_peak());
    result.retained = alice.take_retained();
    return result;
}

std::vector<TimingRow> time_bob_pipeline(std::span<const uint64_t> sizes, double q,
                                         CodeParams params, uint64_t seed,
                                         int repetitions) {
    if (repetitions < 1) throw std::invalid_argument("need at least one repetition");
    std::vector<TimingRow> rows;
    rows.reserve(sizes.size());
    for (uint64_t pulses : sizes) {
        // Pregenerate packed detection flags so the timed loop measures
        // the per-pulse sifting work only.
        std::vector<uint64_t> flags((pulses + 63) / 64, 0);
        PulseSource source(seed, q);
        for (uint64_t i = 0; i < pulses; ++i)
            if (source.next().detected) flags[i >> 6] |= uint64_t{1} << (i & 63);

        double best = std::numeric_limits<double>::infinity();
        uint64_t sink = 0;
        for (int rep = 0; rep < repetitions; ++rep) {
            Encoder encoder(params);
            uint64_t words = 0;
            const auto begin = std::chrono::steady_clock::now();
            for (uint64_t i = 0; i < pulses; ++i) {
                const bool detected = (flags[i >> 6] >> (i & 63)) & 1u;
                if (encoder.push(detected)) ++words;
            }
            if (encoder.finish()) ++words;
            const auto end = std::chrono::steady_clock::now();
            sink += words;
            best = std::min(best, std::chrono::duration<double>(end - begin).count());
        }
        if (sink == std::numeric_limits<uint64_t>::max())
            throw std::logic_error("codeword count overflow");  // keeps the loop observable
        TimingRow row;
        row.pulses = pulses;
        row.seconds = best;
        row.ns_per_pulse = pulses ? best * 1e9 / static_cast<double>(pulses) : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace mzrl
