#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "mzrl/codec.hpp"
#include "mzrl/theory.hpp"

namespace mzrl {

struct OriginalKeyRecord {
    uint64_t index = 0;
    uint8_t key_bits = 0;
    bool detected = false;  // known at Bob only
};

struct RetainedKey {
    uint64_t index = 0;
    uint8_t key_bits = 0;

    friend bool operator==(const RetainedKey&, const RetainedKey&) = default;
};

// Session-final control message: the flush codeword, if a partial run
// was pending, plus the definitive counts.
struct SessionFinish {
    std::optional<uint32_t> flush_word;
    uint64_t source_bit_count = 0;
    uint64_t codeword_count = 0;
};

struct SiftingReport {
    uint64_t source_bits = 0;
    uint64_t code_bits_sent = 0;
    uint64_t raw_keys = 0;
    double empirical_codelength = 0.0;
    double empirical_efficiency = 0.0;
    uint64_t key_consumption_bits = 0;
    uint64_t buffer_peak = 0;
};

// Bob's side: drops undetected originals, runs the detection flags
// through the zero-run encoder and hands every codeword to the sink as
// soon as it is formed (nothing is batched).
class BobEndpoint {
public:
    using WordSink = std::function<void(uint32_t)>;

    BobEndpoint(CodeParams params, WordSink sink);

    void process(const OriginalKeyRecord& record);

    // Ends the session; the flush word travels in the finish message,
    // not through the sink.
    SessionFinish finish();

    uint64_t pulses() const { return pulses_; }
    uint64_t detected() const { return detected_; }
    uint64_t codewords() const { return codewords_; }
    uint64_t code_bits() const { return codewords_ * params_.k; }

private:
    CodeParams params_;
    Encoder encoder_;
    WordSink sink_;
    uint64_t pulses_ = 0;
    uint64_t detected_ = 0;
    uint64_t codewords_ = 0;
    bool finished_ = false;
};

// Alice's side: a FIFO of her own original keys, consumed as codewords
// arrive. c_i discards i keys and retains the (i+1)th; c_{n-1} discards
// n-1 keys. Keys are stored one byte each; indexes are implicit.
class AliceEndpoint {
public:
    // Optional pull source for demand-driven drivers: called with the
    // number of further originals needed. When absent, running short is
    // a protocol violation.
    using RefillFn = std::function<void(AliceEndpoint&, uint64_t)>;

    explicit AliceEndpoint(CodeParams params, RefillFn refill = nullptr);

    void buffer_original(uint64_t index, uint8_t key_bits);
    std::optional<RetainedKey> on_codeword(uint32_t value);
    void on_finish(const SessionFinish& finish);

    const std::vector<RetainedKey>& retained() const { return retained_; }
    std::vector<RetainedKey> take_retained() { return std::move(retained_); }
    uint64_t buffered() const { return buffer_.size(); }
    uint64_t buffer_peak() const { return peak_; }
    uint64_t consumed() const { return consumed_; }
    bool finished() const { return finished_; }

private:
    void ensure_available(uint64_t need);

    CodeParams params_;
    RefillFn refill_;
    std::deque<uint8_t> buffer_;
    uint64_t head_index_ = 0;  // pulse index of buffer_.front()
    uint64_t next_index_ = 0;  // next index expected by buffer_original
    uint64_t consumed_ = 0;
    uint64_t peak_ = 0;
    uint64_t words_seen_ = 0;
    std::vector<RetainedKey> retained_;
    bool finished_ = false;
};

// Session trailer: flush flag u8 | source_bit_count u64 BE |
// codeword_count u64 BE.
inline constexpr std::size_t kWireTrailerBytes = 17;

// Bob-side serializer for the session wire format: the container header
// once at start (counts still zero), codewords packed k bits each with
// only whole bytes leaving mid-session, then the fixed trailer carrying
// the flush flag and the definitive counts.
class WireWriter {
public:
    explicit WireWriter(CodeParams params) : params_(params) {}

    void start(std::vector<uint8_t>& out);
    void word(uint32_t value, std::vector<uint8_t>& out);
    void finish(const SessionFinish& fin, std::vector<uint8_t>& out);

private:
    void drain(std::vector<uint8_t>& out);

    CodeParams params_;
    BitWriter packer_;
    std::size_t drained_ = 0;
    bool started_ = false;
    bool finished_ = false;
};

// Alice-side incremental parser of the same format. Chunk boundaries
// are arbitrary. The last kWireTrailerBytes received are withheld until
// more data or close() proves them payload or trailer, so codewords are
// surfaced with at most a 17-byte lag.
class WireReader {
public:
    struct Callbacks {
        std::function<void(CodeParams)> on_start;
        std::function<void(uint32_t)> on_word;
        std::function<void(const SessionFinish&)> on_finish;
    };

    explicit WireReader(Callbacks callbacks);

    void feed(std::span<const uint8_t> chunk);
    void close();

private:
    void deliver_through(uint64_t safe_payload_bytes);
    uint32_t word_at(uint64_t word_index) const;

    Callbacks callbacks_;
    std::vector<uint8_t> buf_;
    std::size_t payload_offset_ = 0;  // header size once parsed
    bool header_done_ = false;
    bool closed_ = false;
    CodeParams params_{};
    uint64_t delivered_ = 0;
};

struct SessionConfig {
    uint64_t pulses = 0;
    double q = 0.0;
    CodeParams params{};
    LinkBudget link{};  // t_rf and t2..t5 drive the delivery delay; zero = immediate
    uint64_t seed = 1;
    KeyBudget budget{};
};

struct SessionResult {
    SiftingReport report;
    std::vector<uint8_t> traffic;            // exact bytes Bob put on the wire
    std::vector<RetainedKey> retained;       // Alice's raw keys, in order
    std::vector<uint64_t> detected_indexes;  // ground truth from the pulse source
};

// Deterministic pulse stream: detection flags Bernoulli(q), one uniform
// key bit per pulse, consecutive indexes from zero.
class PulseSource {
public:
    PulseSource(uint64_t seed, double q);
    OriginalKeyRecord next();

private:
    std::mt19937_64 rng_;
    uint64_t threshold_ = 0;
    uint64_t next_index_ = 0;
};

// Single-threaded interleaved driver: Alice buffers pulse t, Bob
// processes it, due codewords are delivered, one tick per pulse.
// Codewords emitted at tick t reach Alice at t + ceil(sum(t2..t5)/t_rf).
// Buffer peak is meaningful under this timed schedule.
SessionResult run_session(const SessionConfig& config);

// Two threads joined only by the byte channel; both ends derive the
// pulse stream from the same seed. Produces byte-identical traffic to
// the interleaved driver. Buffer peak here reflects demand-driven
// buffering, not the timed schedule.
SessionResult run_session_concurrent(const SessionConfig& config);

struct TimingRow {
    uint64_t pulses = 0;
    double seconds = 0.0;  // best of the repetitions
    double ns_per_pulse = 0.0;
};

// Times the Bob-side pipeline (flag in, codeword count out) over
// pregenerated detection flags; generation is excluded from the timing.
std::vector<TimingRow> time_bob_pipeline(std::span<const uint64_t> sizes, double q,
                                         CodeParams params, uint64_t seed,
                                         int repetitions = 3);

}  // namespace mzrl
