#include "mzrl/optimizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mzrl/errors.hpp"
#include "mzrl/theory.hpp"

namespace mzrl {

namespace {

void require_solver_domain(double q) {
    if (!(q >= kSolverQMin && q <= kSolverQMax))
        throw SolverDomainError("count rate must lie in [1e-15, 0.1], got " +
                                std::to_string(q));
}

void require_relaxed_domain(double z, double q) {
    if (!(z >= 1.0)) throw std::domain_error("relaxed width must be at least 1");
    if (!(q > 0.0 && q <= kSolverQMax))
        throw std::domain_error("count rate must lie in (0, 0.1]");
}

// L at real-valued width z; the discrete solver calls it at integers.
double codelength_at_width(double z, double q) {
    return q * z / detection_within(std::exp2(z) - 1.0, q);
}

}  // namespace

double codelength_continuous(double z, double q) {
    require_relaxed_domain(z, q);
    return codelength_at_width(z, q);
}

double unimodality_witness(double z, double q) {
    require_relaxed_domain(z, q);
    const double w = std::exp2(z) * std::log1p(-q);  // 2^z ln p, negative
    return (1.0 - q) - std::exp(w) * (1.0 - z * std::numbers::ln2 * w);
}

double stationary_point(double q) {
    if (!(q > 0.0 && q <= kSolverQMax))
        throw std::domain_error("count rate must lie in (0, 0.1]");
    return -std::log2(-std::log1p(-q));
}

double minimizer_root(double q) {
    require_solver_domain(q);
    double lo = stationary_point(q);
    double hi = lo + 3.0;
    if (!(unimodality_witness(lo, q) < 0.0 && unimodality_witness(hi, q) > 0.0))
        throw std::logic_error("witness does not change sign over the bracket");
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (unimodality_witness(mid, q) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

OptimizerResult solve_unconstrained(double q) {
    require_solver_domain(q);
    uint32_t k = static_cast<uint32_t>(std::floor(stationary_point(q)));
    double best = codelength_at_width(k, q);
    uint32_t iterations = 0;
    while (true) {
        ++k;
        const double next = codelength_at_width(k, q);
        ++iterations;
        if (best <= next) break;  // ties resolve to the smaller width
        best = next;
    }
    const uint32_t k_opt = k - 1;
    return OptimizerResult{k_opt, uint64_t{1} << k_opt, best, iterations};
}

OptimizerResult solve_constrained(double q, uint64_t n_max) {
    require_solver_domain(q);
    if (n_max < 2) throw std::invalid_argument("n_max must be at least 2");
    const OptimizerResult unconstrained = solve_unconstrained(q);
    if (n_max >= unconstrained.n_opt) return unconstrained;

    const uint32_t k_max = static_cast<uint32_t>(std::bit_width(n_max)) - 1;
    const uint64_t pow2 = uint64_t{1} << k_max;
    const double at_pow2 = expected_codelength(pow2, q);
    const double at_cap = expected_codelength(n_max, q);
    OptimizerResult result;
    result.iterations = unconstrained.iterations;
    if (at_pow2 > at_cap) {
        result.n_opt = n_max;
        result.codelength = at_cap;
    } else {
        result.n_opt = pow2;
        result.codelength = at_pow2;
    }
    result.k_opt = codeword_width(result.n_opt);
    return result;
}

IterationCensus iteration_census(std::span<const double> q_grid) {
    if (q_grid.empty()) throw std::invalid_argument("empty grid");
    IterationCensus census;
    double total = 0.0;
    for (double q : q_grid) {
        const uint32_t it = solve_unconstrained(q).iterations;
        census.max_iterations = std::max(census.max_iterations, it);
        total += it;
    }
    census.mean_iterations = total / static_cast<double>(q_grid.size());
    return census;
}

std::vector<double> log_spaced_grid(double lo, double hi, std::size_t points) {
    if (points == 0) throw std::invalid_argument("grid needs at least one point");
    if (!(lo > 0.0 && hi >= lo)) throw std::invalid_argument("bad grid bounds");
    std::vector<double> grid(points);
    grid.front() = lo;
    if (points == 1) return grid;
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (std::size_t i = 1; i + 1 < points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(points - 1);
        grid[i] = std::pow(10.0, llo + t * (lhi - llo));
    }
    grid.back() = hi;
    return grid;
}

std::vector<SweepRow> sweep_grid(double q_min, double q_max, std::size_t points) {
    std::vector<SweepRow> rows;
    rows.reserve(points);
    for (double q : log_spaced_grid(q_min, q_max, points)) {
        const OptimizerResult r = solve_unconstrained(q);
        SweepRow row;
        row.q = q;
        row.k_opt = r.k_opt;
        row.n_opt = r.n_opt;
        row.codelength = r.codelength;
        row.entropy = binary_entropy(q);
        row.efficiency = r.codelength / row.entropy;
        row.iterations = r.iterations;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace mzrl
