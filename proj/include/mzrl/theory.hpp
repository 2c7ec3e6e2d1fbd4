#pragma once

#include <cstdint>
#include <vector>

namespace mzrl {

// Code alphabet size n and the fixed codeword width k = ceil(log2 n).
// Codeword c_i (i <= n-2) stands for "i zeros then a one"; c_{n-1}
// stands for a full segment of n-1 zeros.
struct CodeParams {
    uint32_t n = 2;
    uint32_t k = 1;

    // n >= 2; width derived as ceil(log2 n).
    static CodeParams from_alphabet_size(uint32_t n);
    // n = 2^k; k in [1, 31] so n fits the 32-bit container field.
    static CodeParams from_width(uint32_t k);

    friend bool operator==(const CodeParams&, const CodeParams&) = default;
};

// ceil(log2 n) for n >= 2.
uint32_t codeword_width(uint64_t n);

// (1-q)^l, stable for q down to 1e-15 and l up to ~2^60.
double all_zero_prob(double l, double q);

// 1 - (1-q)^l: probability of at least one detection within l pulses.
// Exact (== q) at l == 1 so that n = 2 stays an identity code.
double detection_within(double l, double q);

// P(zero run length == l) = (1-q)^l q for q in (0,1).
double run_length_pmf(uint64_t l, double q);

// Expected per-run occurrence counts of the n source messages.
// Entries 0..n-2 sum to one (each run ends in exactly one terminated
// message); entry n-1 is the expected number of full zero segments,
// (1-q)^{n-1} / (1 - (1-q)^{n-1}), and may exceed one.
std::vector<double> message_stats(const CodeParams& params, double q);

// Expected code bits emitted per zero run: k / (1 - (1-q)^{n-1}).
double expected_codeword_bits_per_run(const CodeParams& params, double q);

// Expected source bits consumed per zero run, computed as the weighted
// message-length sum; equals 1/q.
double expected_message_bits_per_run(const CodeParams& params, double q);

// Expected code bits per source bit: q * ceil(log2 n) / (1 - (1-q)^{n-1}).
double expected_codelength(uint64_t n, double q);
double expected_codelength(const CodeParams& params, double q);

// h(q) = -q log2 q - (1-q) log2(1-q), for q in (0,1).
double binary_entropy(double q);

// f = L / h(q); 1.0 is the Shannon limit for a lossless code.
double compression_efficiency(double codelength, double q);

// Physical link parameters that determine the count rate, plus the
// pipeline timing used for buffer sizing.
struct LinkBudget {
    double mu = 0.0;                // mean photon number per pulse
    double alpha_db_per_km = 0.0;   // fibre loss coefficient
    double distance_km = 0.0;
    double gamma_bob_db = 0.0;      // receiver internal loss
    double eta_d = 0.0;             // detector efficiency, fraction
    double p_dark = 0.0;            // dark count probability per pulse

    // When >= 0 this single dB figure replaces alpha*d + gamma_bob
    // (the convention of data sheets quoting one combined loss).
    double combined_loss_db = -1.0;

    double t_rf_s = 0.0;            // repetition period (1 / repetition frequency)
    double t2_s = 0.0;              // Alice -> Bob propagation
    double t3_s = 0.0;              // Bob-side processing
    double t4_s = 0.0;              // Bob -> Alice propagation
    double t5_s = 0.0;              // Alice-side decode

    static LinkBudget with_combined_loss(double p_dark, double mu,
                                         double loss_db, double eta_d);

    double total_loss_db() const;
    double pipeline_latency_s() const { return t2_s + t3_s + t4_s + t5_s; }
};

// q = 1 - exp(-mu * 10^(-loss/10) * eta_D) + P_d.
double count_rate(const LinkBudget& link);

// Worst-case number of original keys Alice holds while waiting for a
// codeword: ceil((n-1) + (t2+t3+t4+t5)/t_rf).
uint64_t buffer_occupancy(const CodeParams& params, const LinkBudget& link);

// Authentication accounting: one tag per block of classical traffic.
struct KeyBudget {
    uint32_t tag_bits = 127;
    uint64_t block_bits = uint64_t{1} << 20;
};

// Secret bits spent authenticating the sifting traffic for m original
// keys at compression efficiency f: tag_bits * ceil(m h(q) f / block_bits).
uint64_t key_consumption(uint64_t m, double q, double f,
                         const KeyBudget& budget = {});

}  // namespace mzrl
