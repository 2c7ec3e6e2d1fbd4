#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mzrl {

// Interval on which the optimality results hold; solver entry points
// reject anything outside it.
inline constexpr double kSolverQMin = 1e-15;
inline constexpr double kSolverQMax = 0.1;

struct OptimizerResult {
    uint32_t k_opt = 0;       // codeword width of the chosen alphabet
    uint64_t n_opt = 0;       // alphabet size (2^k_opt when unconstrained)
    double codelength = 0.0;  // expected code bits per source bit at n_opt
    uint32_t iterations = 0;  // loop passes of the iterative solver
};

// Expected codelength with the width relaxed to real z >= 1:
// L(z) = q z / (1 - (1-q)^(2^z - 1)). Agrees exactly with
// expected_codelength(2^k, q) at integer z = k.
double codelength_continuous(double z, double q);

// r(z) = p - p^(2^z) + z 2^z p^(2^z) ln2 ln p with p = 1-q.
// Shares its sign with dL/dz: negative left of the minimizer,
// positive right of it.
double unimodality_witness(double z, double q);

// z_m = -log2(-ln(1-q)): the stationary point of the witness, a strict
// lower bound for the minimizer of L(z).
double stationary_point(double q);

// The root z0 of the witness, located by bisection over
// (z_m, z_m + 3); L(z) attains its global minimum there.
double minimizer_root(double q);

// Minimize L over widths k in N+ by iterating upward from floor(z_m).
OptimizerResult solve_unconstrained(double q);

// Minimize L over alphabet sizes 2..n_max. Returns 2^k_opt when it
// fits; otherwise the better of 2^floor(log2 n_max) and n_max.
OptimizerResult solve_constrained(double q, uint64_t n_max);

struct IterationCensus {
    uint32_t max_iterations = 0;
    double mean_iterations = 0.0;
};

// Runs the unconstrained solver over a grid of count rates and reports
// the iteration-count statistics.
IterationCensus iteration_census(std::span<const double> q_grid);

// `points` values spanning [lo, hi] evenly in log space, endpoints
// included exactly.
std::vector<double> log_spaced_grid(double lo, double hi, std::size_t points);

// One point of an efficiency sweep.
struct SweepRow {
    double q = 0.0;
    uint32_t k_opt = 0;
    uint64_t n_opt = 0;
    double codelength = 0.0;
    double entropy = 0.0;
    double efficiency = 0.0;
    uint32_t iterations = 0;
};

std::vector<SweepRow> sweep_grid(double q_min, double q_max, std::size_t points);

}  // namespace mzrl
