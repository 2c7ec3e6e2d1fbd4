#include "mzrl/recommend.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mzrl/optimizer.hpp"

namespace mzrl {

Recommendation recommend_system(const SystemParams& system) {
    if (system.bits_per_key == 0)
        throw std::invalid_argument("bits per key must be positive");
    if (system.reserved_bits > system.storage_bits)
        throw std::invalid_argument("reserved storage exceeds the total for \"" +
                                    system.name + "\"");
    Recommendation rec;
    rec.system_name = system.name;
    rec.link = system.link;
    rec.q = count_rate(system.link);

    const OptimizerResult unconstrained = solve_unconstrained(rec.q);
    rec.n_theoretical = unconstrained.n_opt;
    rec.f_theoretical = compression_efficiency(unconstrained.codelength, rec.q);

    rec.storage_limit_bits = system.storage_bits - system.reserved_bits;
    rec.n_max = rec.storage_limit_bits / system.bits_per_key;
    if (rec.n_max < 2)
        throw std::invalid_argument("storage of \"" + system.name +
                                    "\" holds fewer than two original keys");
    const OptimizerResult constrained = solve_constrained(rec.q, rec.n_max);
    rec.n_recommended = constrained.n_opt;
    rec.f_actual = compression_efficiency(constrained.codelength, rec.q);
    return rec;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto first = field.find_first_not_of(" \t\r");
        const auto last = field.find_last_not_of(" \t\r");
        fields.push_back(first == std::string::npos
                             ? std::string{}
                             : field.substr(first, last - first + 1));
    }
    return fields;
}

double parse_double(const std::string& s, const std::string& column, std::size_t row) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("row " + std::to_string(row) + ": bad value \"" +
                                    s + "\" in column " + column);
    }
}

uint64_t parse_u64(const std::string& s, const std::string& column, std::size_t row) {
    const double v = parse_double(s, column, row);
    if (v < 0.0 || v != std::floor(v) || v > 1.8e19)
        throw std::invalid_argument("row " + std::to_string(row) +
                                    ": column " + column + " must be a whole bit count");
    return static_cast<uint64_t>(v);
}

constexpr const char* kColumns[] = {"name",     "p_dark",       "mu",
                                    "distance_km", "loss_db",   "eta_d",
                                    "storage_bits", "reserved_bits", "bits_per_key"};
constexpr std::size_t kColumnCount = sizeof(kColumns) / sizeof(kColumns[0]);

}  // namespace

std::vector<SystemParams> load_systems_csv(std::istream& in) {
    std::vector<SystemParams> systems;
    std::string line;
    bool header_seen = false;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split_csv_line(line);
        if (!header_seen) {
            if (fields.size() != kColumnCount)
                throw std::invalid_argument("header must list " +
                                            std::to_string(kColumnCount) + " columns");
            for (std::size_t i = 0; i < kColumnCount; ++i)
                if (fields[i] != kColumns[i])
                    throw std::invalid_argument("unexpected header column \"" +
                                                fields[i] + "\", expected \"" +
                                                kColumns[i] + "\"");
            header_seen = true;
            continue;
        }
        if (fields.size() != kColumnCount)
            throw std::invalid_argument("row " + std::to_string(row) + ": expected " +
                                        std::to_string(kColumnCount) + " fields, got " +
                                        std::to_string(fields.size()));
        SystemParams sys;
        sys.name = fields[0];
        const double p_dark = parse_double(fields[1], "p_dark", row);
        const double mu = parse_double(fields[2], "mu", row);
        const double distance_km = parse_double(fields[3], "distance_km", row);
        const double loss_db = parse_double(fields[4], "loss_db", row);
        const double eta_d = parse_double(fields[5], "eta_d", row);
        sys.link = LinkBudget::with_combined_loss(p_dark, mu, loss_db, eta_d);
        sys.link.distance_km = distance_km;
        sys.storage_bits = parse_u64(fields[6], "storage_bits", row);
        sys.reserved_bits = parse_u64(fields[7], "reserved_bits", row);
        const uint64_t bpk = parse_u64(fields[8], "bits_per_key", row);
        if (bpk == 0 || bpk > 64)
            throw std::invalid_argument("row " + std::to_string(row) +
                                        ": bits_per_key must lie in [1, 64]");
        sys.bits_per_key = static_cast<uint32_t>(bpk);
        systems.push_back(std::move(sys));
    }
    if (!header_seen) throw std::invalid_argument("system file has no header row");
    return systems;
}

std::vector<SystemParams> load_systems_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open system file: " + path);
    return load_systems_csv(in);
}

}  // namespace mzrl
