#include "mzrl/theory.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mzrl/errors.hpp"

namespace mzrl {

namespace {

void require_open_unit(double q) {
    if (!(q > 0.0) || !(q < 1.0))
        throw std::domain_error("count rate must lie in (0, 1), got " + std::to_string(q));
}

}  // namespace

CodeParams CodeParams::from_alphabet_size(uint32_t n) {
    if (n < 2) throw std::invalid_argument("alphabet size must be at least 2");
    return CodeParams{n, codeword_width(n)};
}

CodeParams CodeParams::from_width(uint32_t k) {
    if (k < 1 || k > 31) throw std::invalid_argument("codeword width must lie in [1, 31]");
    return CodeParams{uint32_t{1} << k, k};
}

uint32_t codeword_width(uint64_t n) {
    if (n < 2) throw std::invalid_argument("alphabet size must be at least 2");
    return static_cast<uint32_t>(std::bit_width(n - 1));
}

double all_zero_prob(double l, double q) {
    if (l == 0.0) return 1.0;
    if (l == 1.0) return 1.0 - q;
    // exp(l log(1-q)) keeps full precision where pow(1-q, l) would not.
    return std::exp(l * std::log1p(-q));
}

double detection_within(double l, double q) {
    if (l == 1.0) return q;
    return -std::expm1(l * std::log1p(-q));
}

double run_length_pmf(uint64_t l, double q) {
    require_open_unit(q);
    return all_zero_prob(static_cast<double>(l), q) * q;
}

std::vector<double> message_stats(const CodeParams& params, double q) {
    require_open_unit(q);
    const double denom = detection_within(params.n - 1.0, q);
    std::vector<double> weights(params.n);
    for (uint32_t i = 0; i + 1 < params.n; ++i)
        weights[i] = q * all_zero_prob(i, q) / denom;
    weights[params.n - 1] = all_zero_prob(params.n - 1.0, q) / denom;
    return weights;
}

double expected_codeword_bits_per_run(const CodeParams& params, double q) {
    require_open_unit(q);
    return params.k / detection_within(params.n - 1.0, q);
}

double expected_message_bits_per_run(const CodeParams& params, double q) {
    require_open_unit(q);
    const double denom = detection_within(params.n - 1.0, q);
    // Neumaier summation: the sum has up to n terms and is checked
    // against 1/q at 1e-12 relative.
    double sum = 0.0, comp = 0.0;
    auto add = [&](double term) {
        const double t = sum + term;
        comp += (std::abs(sum) >= std::abs(term)) ? (sum - t) + term : (term - t) + sum;
        sum = t;
    };
    for (uint32_t i = 0; i + 1 < params.n; ++i)
        add(q * all_zero_prob(i, q) / denom * (i + 1.0));
    add(all_zero_prob(params.n - 1.0, q) / denom * (params.n - 1.0));
    return sum + comp;
}

double expected_codelength(uint64_t n, double q) {
    require_open_unit(q);
    const uint32_t k = codeword_width(n);
    return q * k / detection_within(static_cast<double>(n - 1), q);
}

double expected_codelength(const CodeParams& params, double q) {
    return expected_codelength(params.n, q);
}

double binary_entropy(double q) {
    require_open_unit(q);
    return -(q * std::log(q) + (1.0 - q) * std::log1p(-q)) / std::numbers::ln2;
}

double compression_efficiency(double codelength, double q) {
    if (!(codelength > 0.0)) throw std::invalid_argument("codelength must be positive");
    return codelength / binary_entropy(q);
}

LinkBudget LinkBudget::with_combined_loss(double p_dark, double mu,
                                          double loss_db, double eta_d) {
    LinkBudget link;
    link.p_dark = p_dark;
    link.mu = mu;
    link.eta_d = eta_d;
    link.combined_loss_db = loss_db;
    return link;
}

double LinkBudget::total_loss_db() const {
    if (combined_loss_db >= 0.0) return combined_loss_db;
    return alpha_db_per_km * distance_km + gamma_bob_db;
}

double count_rate(const LinkBudget& link) {
    if (link.mu < 0.0 || link.eta_d < 0.0 || link.eta_d > 1.0)
        throw std::invalid_argument("mean photon number and detector efficiency out of range");
    if (link.p_dark < 0.0 || link.p_dark >= 1.0)
        throw std::invalid_argument("dark count probability out of range");
    if (link.total_loss_db() < 0.0)
        throw std::invalid_argument("loss must be non-negative");
    const double transmittance = std::pow(10.0, -link.total_loss_db() / 10.0);
    const double q = -std::expm1(-link.mu * transmittance * link.eta_d) + link.p_dark;
    if (q >= 1.0) throw std::domain_error("count rate reaches 1");
    return q;
}

uint64_t buffer_occupancy(const CodeParams& params, const LinkBudget& link) {
    if (!(link.t_rf_s > 0.0))
        throw std::invalid_argument("repetition period must be positive");
    const double keys = (params.n - 1.0) + link.pipeline_latency_s() / link.t_rf_s;
    // Latencies that are exact multiples of the period must not round up
    // on floating-point noise.
    const double nudged = keys * (1.0 - 4.0 * std::numeric_limits<double>::epsilon());
    return static_cast<uint64_t>(std::ceil(nudged));
}

uint64_t key_consumption(uint64_t m, double q, double f, const KeyBudget& budget) {
    if (m == 0) return 0;
    if (!(f >= 1.0)) throw std::invalid_argument("compression efficiency must be at least 1");
    const double blocks =
        std::ceil(static_cast<double>(m) * binary_entropy(q) * f /
                  static_cast<double>(budget.block_bits));
    return budget.tag_bits * static_cast<uint64_t>(blocks);
}

}  // namespace mzrl
