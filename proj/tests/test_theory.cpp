#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mzrl/errors.hpp"
#include "mzrl/theory.hpp"
#include "oracles.hpp"

using namespace mzrl;

TEST_CASE("code params derive the width") {
    CHECK(CodeParams::from_alphabet_size(2).k == 1);
    CHECK(CodeParams::from_alphabet_size(3).k == 2);
    CHECK(CodeParams::from_alphabet_size(4).k == 2);
    CHECK(CodeParams::from_alphabet_size(5).k == 3);
    CHECK(CodeParams::from_alphabet_size(12288).k == 14);
    CHECK(CodeParams::from_width(22).n == (1u << 22));
    CHECK_THROWS_AS(CodeParams::from_alphabet_size(1), std::invalid_argument);
    CHECK_THROWS_AS(CodeParams::from_width(0), std::invalid_argument);
    CHECK_THROWS_AS(CodeParams::from_width(32), std::invalid_argument);
}

TEST_CASE("run length pmf") {
    CHECK(run_length_pmf(0, 0.5) == 0.5);
    CHECK(run_length_pmf(1, 0.1) == doctest::Approx(0.09).epsilon(1e-14));
    // direct product at a longer run
    CHECK(run_length_pmf(16, 0.05) ==
          doctest::Approx(oracle::pmf(16.0, 0.05)).epsilon(1e-13));
    // the distribution is normalized
    CHECK(oracle::pmf_partial_sum(0.05) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(run_length_pmf(1, 0.0), std::domain_error);
    CHECK_THROWS_AS(run_length_pmf(1, 1.0), std::domain_error);
}

TEST_CASE("message stats closed forms") {
    // n=2, q=0.5: both weights are exactly 1
    const auto w2 = message_stats(CodeParams::from_alphabet_size(2), 0.5);
    CHECK(w2[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(w2[1] == doctest::Approx(1.0).epsilon(1e-14));

    // n=4, q=0.1: full-segment weight 0.6561/0.2439
    const auto w4 = message_stats(CodeParams::from_alphabet_size(4), 0.1);
    CHECK(w4[3] == doctest::Approx(2.690036900369004).epsilon(1e-12));
}

TEST_CASE("message stats agree with the defining series") {
    for (uint32_t n : {2u, 3u, 4u, 8u, 17u}) {
        for (double q : {0.02, 0.1, 0.3}) {
            CAPTURE(n);
            CAPTURE(q);
            const auto w = message_stats(CodeParams::from_alphabet_size(n), q);
            const auto ref = oracle::message_weights_series(n, q);
            for (uint32_t i = 0; i < n; ++i)
                CHECK(w[i] == doctest::Approx(ref[i]).epsilon(1e-10));
        }
    }
}

TEST_CASE("terminated message weights sum to one") {
    for (uint32_t n : {2u, 3u, 5u, 64u, 1000u}) {
        for (double q : {1e-12, 1e-6, 1e-3, 0.05, 0.1, 0.5, 0.9}) {
            CAPTURE(n);
            CAPTURE(q);
            const auto w = message_stats(CodeParams::from_alphabet_size(n), q);
            const double sum = std::accumulate(w.begin(), w.end() - 1, 0.0);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(w[n - 1] >= 0.0);
        }
    }
}

TEST_CASE("message stats match Monte-Carlo frequencies") {
    // expected per-run occurrence counts of each message, n=4, q=0.1
    const uint32_t n = 4;
    const double q = 0.1;
    const auto w = message_stats(CodeParams::from_alphabet_size(n), q);
    oracle::RunSampler runs(20240001, q);
    const uint64_t kRuns = 1'000'000;
    std::vector<double> counts(n, 0.0);
    for (uint64_t r = 0; r < kRuns; ++r) {
        const uint64_t l = runs.next();
        counts[n - 1] += static_cast<double>(l / (n - 1));
        counts[l % (n - 1)] += 1.0;
    }
    for (auto& c : counts) c /= static_cast<double>(kRuns);
    for (uint32_t i = 0; i < n; ++i) {
        CAPTURE(i);
        CHECK(counts[i] == doctest::Approx(w[i]).epsilon(0.02));
    }
}

TEST_CASE("expected codeword bits per run") {
    // n=2: one codeword per run, 1/q runs weighting
    CHECK(expected_codeword_bits_per_run(CodeParams::from_alphabet_size(2), 0.25) ==
          doctest::Approx(1.0 / 0.25).epsilon(1e-14));

    const auto params = CodeParams::from_alphabet_size(64);
    const double per_run = expected_codeword_bits_per_run(params, 0.05);
    CHECK(per_run == doctest::Approx(6.246740593304076).epsilon(1e-12));

    // oracle: sum of weights times the constant width
    const auto w = message_stats(params, 0.05);
    const double direct = std::accumulate(w.begin(), w.end(), 0.0) * params.k;
    CHECK(per_run == doctest::Approx(direct).epsilon(1e-12));

    // algebraic identity with the full-segment weight
    CHECK(per_run ==
          doctest::Approx(params.k * (1.0 + w[params.n - 1])).epsilon(1e-14));
}

TEST_CASE("expected message bits per run equal 1/q") {
    CHECK(expected_message_bits_per_run(CodeParams::from_alphabet_size(2), 0.5) ==
          doctest::Approx(2.0).epsilon(1e-13));
    CHECK(expected_message_bits_per_run(CodeParams::from_alphabet_size(8), 0.1) ==
          doctest::Approx(10.0).epsilon(1e-13));
    for (uint32_t n : {2u, 3u, 64u, 4096u})
        for (double q : {1e-4, 1e-2, 0.1, 0.5})
            CHECK(expected_message_bits_per_run(CodeParams::from_alphabet_size(n), q) ==
                  doctest::Approx(1.0 / q).epsilon(1e-12));
}

TEST_CASE("mean source bits per run match Monte-Carlo") {
    const double q = 0.05;
    oracle::RunSampler runs(20240002, q);
    const uint64_t kRuns = 10'000'000;
    double total = 0.0;
    for (uint64_t r = 0; r < kRuns; ++r)
        total += static_cast<double>(runs.next()) + 1.0;  // zeros plus the one
    const double mean = total / static_cast<double>(kRuns);
    CHECK(expected_message_bits_per_run(CodeParams::from_alphabet_size(64), q) ==
          doctest::Approx(mean).epsilon(2e-3));
}

TEST_CASE("expected codelength") {
    // n=2 is an identity code at every count rate, exactly
    for (double q : {1e-15, 1e-9, 1e-3, 0.1, 0.5, 0.99})
        CHECK(expected_codelength(2, q) == 1.0);

    CHECK(expected_codelength(64, 0.05) ==
          doctest::Approx(0.3123370296652038).epsilon(1e-12));
    CHECK(expected_codelength(uint64_t{1} << 22, 1e-6) ==
          doctest::Approx(2.2336867181347334e-05).epsilon(1e-12));

    // ratio of the two per-run quantities
    const auto params = CodeParams::from_alphabet_size(64);
    for (double q : {1e-3, 0.05, 0.3})
        CHECK(expected_codelength(params, q) ==
              doctest::Approx(expected_codeword_bits_per_run(params, q) /
                              expected_message_bits_per_run(params, q))
                  .epsilon(1e-12));
}

TEST_CASE("binary entropy") {
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(binary_entropy(0.1) == doctest::Approx(0.4689955935892812).epsilon(1e-13));
    CHECK(binary_entropy(2.76e-3) ==
          doctest::Approx(0.027439418522389784).epsilon(1e-13));
    CHECK_THROWS_AS(binary_entropy(0.0), std::domain_error);
    CHECK_THROWS_AS(binary_entropy(1.0), std::domain_error);
}

TEST_CASE("compression efficiency") {
    const double h = binary_entropy(0.05);
    CHECK(compression_efficiency(h, 0.05) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(compression_efficiency(expected_codelength(64, 0.05), 0.05) ==
          doctest::Approx(1.0905738413231294).epsilon(1e-12));
    CHECK(compression_efficiency(expected_codelength(12288, 7.44e-7), 7.44e-7) ==
          doctest::Approx(70.57).epsilon(1e-3));
    CHECK_THROWS_AS(compression_efficiency(0.0, 0.05), std::invalid_argument);
}

TEST_CASE("codelength never beats the entropy bound") {
    for (double q : {1e-15, 1e-9, 1e-6, 1e-3, 0.05, 0.1}) {
        const double h = binary_entropy(q);
        for (uint64_t n : {2ull, 3ull, 17ull, 256ull, 1ull << 22}) {
            CAPTURE(q);
            CAPTURE(n);
            CHECK(expected_codelength(n, q) >= h);
        }
    }
}

TEST_CASE("count rate from the link budget") {
    // no signal photons: only dark counts remain
    LinkBudget dark;
    dark.mu = 0.0;
    dark.eta_d = 0.1;
    dark.p_dark = 1e-5;
    CHECK(count_rate(dark) == doctest::Approx(1e-5).epsilon(1e-14));

    const auto dixon = LinkBudget::with_combined_loss(1.36e-5, 0.55, 8.01, 0.10);
    CHECK(count_rate(dixon) == doctest::Approx(0.008672755886311109).epsilon(1e-12));
    CHECK(count_rate(dixon) == doctest::Approx(8.68e-3).epsilon(0.01));

    const auto stucki = LinkBudget::with_combined_loss(1.60e-8, 0.50, 42.60, 0.0265);
    CHECK(count_rate(stucki) == doctest::Approx(7.441413927662803e-07).epsilon(1e-12));
    CHECK(count_rate(stucki) == doctest::Approx(7.44e-7).epsilon(0.01));

    // separate transmission and receiver losses
    LinkBudget split;
    split.mu = 0.5;
    split.alpha_db_per_km = 0.2;
    split.distance_km = 20.0;
    split.gamma_bob_db = 4.0;
    split.eta_d = 0.1;
    split.p_dark = 1e-5;
    CHECK(split.total_loss_db() == doctest::Approx(8.0));
    const auto merged = LinkBudget::with_combined_loss(1e-5, 0.5, 8.0, 0.1);
    CHECK(count_rate(split) == doctest::Approx(count_rate(merged)).epsilon(1e-14));

    LinkBudget saturated;
    saturated.mu = 1000.0;
    saturated.eta_d = 1.0;
    saturated.p_dark = 0.5;
    CHECK_THROWS_AS(count_rate(saturated), std::domain_error);
}

TEST_CASE("count rate monotonicity over the typical parameter ranges") {
    auto make = [](double mu, double d, double eta) {
        LinkBudget link;
        link.mu = mu;
        link.alpha_db_per_km = 0.2;
        link.distance_km = d;
        link.gamma_bob_db = 4.0;
        link.eta_d = eta;
        link.p_dark = 1e-5;
        return link;
    };
    for (double d : {0.0, 50.0, 125.0, 250.0})
        for (double eta : {0.02, 0.1, 0.3}) {
            double prev = -1.0;
            for (double mu : {0.1, 0.3, 0.5, 0.7, 1.0}) {
                const double q = count_rate(make(mu, d, eta));
                CHECK(q > prev);
                prev = q;
            }
        }
    for (double mu : {0.1, 0.5, 1.0})
        for (double eta : {0.02, 0.1, 0.3}) {
            double prev = 2.0;
            for (double d : {0.0, 50.0, 125.0, 250.0}) {
                const double q = count_rate(make(mu, d, eta));
                CHECK(q < prev);
                prev = q;
            }
        }
    for (double mu : {0.1, 0.5, 1.0})
        for (double d : {0.0, 125.0, 250.0}) {
            double prev = -1.0;
            for (double eta : {0.02, 0.1, 0.2, 0.3}) {
                const double q = count_rate(make(mu, d, eta));
                CHECK(q > prev);
                prev = q;
            }
        }
}

TEST_CASE("buffer occupancy") {
    LinkBudget link;
    link.t_rf_s = 1e-9;
    CHECK(buffer_occupancy(CodeParams::from_alphabet_size(64), link) == 63);

    link.t2_s = 4e-9;
    link.t3_s = 2e-9;
    link.t4_s = 3e-9;
    link.t5_s = 1e-9;  // total 10 periods
    CHECK(buffer_occupancy(CodeParams::from_alphabet_size(4), link) == 13);

    LinkBudget fast;
    fast.t_rf_s = 1e-9;
    CHECK(buffer_occupancy(CodeParams::from_width(22), fast) == (1u << 22) - 1);

    LinkBudget zero;
    CHECK_THROWS_AS(buffer_occupancy(CodeParams::from_alphabet_size(4), zero),
                    std::invalid_argument);
}

TEST_CASE("key consumption") {
    CHECK(key_consumption(0, 0.5, 1.0) == 0);
    CHECK(key_consumption(uint64_t{1} << 30, 2.76e-3, 1.07) == 3937);
    CHECK_THROWS_AS(key_consumption(100, 0.1, 0.5), std::invalid_argument);

    // consumption scales linearly with the efficiency once ceilings stop
    // mattering
    const uint64_t m = uint64_t{1} << 40;
    const double fa = 1.07, fb = 1.51;
    const double ratio =
        static_cast<double>(key_consumption(m, 2.76e-3, fa)) /
        static_cast<double>(key_consumption(m, 2.76e-3, fb));
    CHECK(ratio == doctest::Approx(fa / fb).epsilon(1e-4));

    // defaults: 127-bit tags per 2^20-bit block
    KeyBudget budget;
    CHECK(budget.tag_bits == 127);
    CHECK(budget.block_bits == (uint64_t{1} << 20));
}
