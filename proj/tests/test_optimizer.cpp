#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mzrl/errors.hpp"
#include "mzrl/optimizer.hpp"
#include "mzrl/theory.hpp"
#include "oracles.hpp"

using namespace mzrl;

TEST_CASE("continuous codelength") {
    for (double q : {1e-6, 1e-3, 0.05, 0.1})
        CHECK(codelength_continuous(1.0, q) == 1.0);

    // integer widths agree with the discrete formula bit for bit
    for (uint32_t k : {1u, 2u, 6u, 22u})
        for (double q : {1e-6, 1e-2, 0.1})
            CHECK(codelength_continuous(k, q) ==
                  expected_codelength(uint64_t{1} << k, q));

    CHECK_THROWS_AS(codelength_continuous(0.5, 0.05), std::domain_error);
    CHECK_THROWS_AS(codelength_continuous(2.0, 0.2), std::domain_error);
}

TEST_CASE("grid-search minimum lies inside the bracket") {
    for (double q : {0.05, 0.01}) {
        CAPTURE(q);
        const double zm = stationary_point(q);
        const double z_star = oracle::grid_search_min_z(q, 1.0, 20.0, 1e-3);
        CHECK(z_star > zm);
        CHECK(z_star < zm + 3.0);
        // the bisection root matches the grid-search minimizer to a step
        CHECK(std::abs(minimizer_root(q) - z_star) <= 2e-3);
    }
}

TEST_CASE("witness signs") {
    // negative at the left edge of the domain
    CHECK(unimodality_witness(1.0, 0.1) < 0.0);
    for (double q : log_spaced_grid(1e-15, 0.1, 50)) {
        CAPTURE(q);
        const double zm = stationary_point(q);
        CHECK(unimodality_witness(zm + 3.0, q) > 0.0);  // positive past the bracket
        const double z0 = minimizer_root(q);
        CHECK(z0 > zm);
        CHECK(z0 < zm + 3.0);
        // sign change straddles the root
        CHECK(unimodality_witness(z0 - 1e-6, q) < 0.0);
        CHECK(unimodality_witness(z0 + 1e-6, q) > 0.0);
    }
}

TEST_CASE("unconstrained solver spot values") {
    const auto r1 = solve_unconstrained(1e-6);
    CHECK(r1.k_opt == 22);
    CHECK(r1.n_opt == (uint64_t{1} << 22));
    CHECK(r1.codelength == doctest::Approx(2.2336867181347334e-05).epsilon(1e-12));

    const auto r2 = solve_unconstrained(0.05);
    CHECK(r2.k_opt == 6);

    const auto r3 = solve_unconstrained(0.1);
    CHECK(r3.k_opt == 4);
    CHECK(r3.codelength == doctest::Approx(0.5037092723257129).epsilon(1e-12));

    // the discrete optimum is a local minimum
    for (double q : {1e-6, 1e-3, 0.05, 0.1}) {
        const auto r = solve_unconstrained(q);
        const double at = codelength_continuous(r.k_opt, q);
        CHECK(at <= codelength_continuous(r.k_opt + 1.0, q));
        if (r.k_opt > 1) CHECK(at <= codelength_continuous(r.k_opt - 1.0, q));
    }

    CHECK_THROWS_AS(solve_unconstrained(0.5), SolverDomainError);
    CHECK_THROWS_AS(solve_unconstrained(1e-16), SolverDomainError);
    CHECK_NOTHROW(solve_unconstrained(0.1));    // boundary included
    CHECK_NOTHROW(solve_unconstrained(1e-15));  // boundary included
}

TEST_CASE("unconstrained solver agrees with brute force") {
    for (double q : log_spaced_grid(1e-6, 1e-1, 100)) {
        CAPTURE(q);
        CHECK(solve_unconstrained(q).k_opt == oracle::brute_force_width(q));
    }
}

TEST_CASE("constrained solver spot values") {
    CHECK(solve_constrained(0.05, 80).n_opt == 64);
    CHECK(solve_constrained(0.05, 30).n_opt == 30);
    CHECK(solve_constrained(0.05, 18).n_opt == 16);

    // constrained Stucki-class case: 12K alphabet, efficiency far from 1
    const auto r = solve_constrained(7.44e-7, 12 * 1024);
    CHECK(r.n_opt == 12288);
    CHECK(r.codelength / binary_entropy(7.44e-7) == doctest::Approx(70.57).epsilon(1e-3));

    CHECK_THROWS_AS(solve_constrained(0.05, 1), std::invalid_argument);
    CHECK_THROWS_AS(solve_constrained(0.5, 64), SolverDomainError);
}

TEST_CASE("constrained solver agrees with brute force") {
    for (double q : log_spaced_grid(1e-6, 1e-1, 25)) {
        for (uint64_t n_max : {2ull, 3ull, 17ull, 100ull, 4096ull}) {
            CAPTURE(q);
            CAPTURE(n_max);
            const auto got = solve_constrained(q, n_max);
            const uint64_t want = oracle::brute_force_alphabet(q, n_max);
            // ties between alphabet sizes resolve by codelength equality;
            // the tolerance is the oracle's own cancellation error at
            // small q, not the library's
            CHECK(got.codelength ==
                  doctest::Approx(oracle::codelength_direct(
                                      static_cast<double>(want), q))
                      .epsilon(1e-8));
        }
    }
}

TEST_CASE("codelength is minimal at the segment's power of two") {
    for (double q : {1e-3, 0.01, 0.05})
        for (uint32_t k : {3u, 5u, 8u}) {
            const uint64_t hi = uint64_t{1} << k;
            const double at_pow = expected_codelength(hi, q);
            for (uint64_t n = (hi >> 1) + 1; n <= hi; ++n)
                CHECK(expected_codelength(n, q) >= at_pow);
        }
}

TEST_CASE("optimal width is non-increasing in the count rate") {
    uint32_t prev = 0xFFFFFFFF;
    for (double q : log_spaced_grid(1e-6, 1e-1, 100)) {
        const uint32_t k = solve_unconstrained(q).k_opt;
        CHECK(k <= prev);
        prev = k;
    }
}

TEST_CASE("iteration counts") {
    CHECK(solve_unconstrained(1e-6).iterations == 4);
    CHECK(solve_unconstrained(0.05).iterations == 3);
    CHECK(solve_unconstrained(0.1).iterations == 2);

    const auto grid = log_spaced_grid(1e-6, 1e-1, 100);
    const auto census = iteration_census(grid);
    CHECK(census.max_iterations == 4);
    CHECK(census.mean_iterations == doctest::Approx(3.28).epsilon(1e-6));

    // every point converges within five passes
    for (double q : log_spaced_grid(1e-15, 1e-1, 200))
        CHECK(solve_unconstrained(q).iterations <= 5);

    const double single[] = {1e-3};
    const auto one = iteration_census(single);
    CHECK(one.mean_iterations == doctest::Approx(one.max_iterations));
}

TEST_CASE("root bracket across the full domain") {
    for (double q : log_spaced_grid(1e-15, 0.1, 200)) {
        CAPTURE(q);
        const double zm = stationary_point(q);
        const double z0 = minimizer_root(q);
        CHECK(z0 > zm);
        CHECK(z0 < zm + 3.0);
        // bisection leaves a negligible residual
        CHECK(std::abs(unimodality_witness(z0, q)) <
              1e-6 * unimodality_witness(zm + 3.0, q));
    }
}

TEST_CASE("log spaced grid hits both endpoints") {
    const auto grid = log_spaced_grid(1e-6, 1e-1, 100);
    REQUIRE(grid.size() == 100);
    CHECK(grid.front() == 1e-6);
    CHECK(grid.back() == 1e-1);
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
    // log-even spacing
    const double step = std::log10(grid[1]) - std::log10(grid[0]);
    CHECK(step == doctest::Approx(5.0 / 99.0).epsilon(1e-9));
    CHECK(log_spaced_grid(0.5, 0.5, 1).size() == 1);
}

TEST_CASE("sweep rows") {
    const auto rows = sweep_grid(1e-6, 1e-1, 100);
    REQUIRE(rows.size() == 100);
    double max_f = 0.0;
    for (const auto& row : rows) {
        CHECK(row.efficiency == doctest::Approx(row.codelength / row.entropy)
                                    .epsilon(1e-12));
        CHECK(row.efficiency >= 1.0);
        CHECK(row.n_opt == (uint64_t{1} << row.k_opt));
        max_f = std::max(max_f, row.efficiency);
    }
    CHECK(max_f < 1.10);
}
