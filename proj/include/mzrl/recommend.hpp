#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "mzrl/theory.hpp"

namespace mzrl {

// One row of a system parameter file: link figures plus the storage
// actually available for buffering original keys.
struct SystemParams {
    std::string name;
    LinkBudget link;              // combined-loss form
    uint64_t storage_bits = 0;    // total sifting storage
    uint64_t reserved_bits = 0;   // carved out for other steps
    uint32_t bits_per_key = 1;    // stored bits per original key (2 for COW)
};

struct Recommendation {
    std::string system_name;
    LinkBudget link;
    double q = 0.0;
    uint64_t n_theoretical = 0;
    double f_theoretical = 0.0;
    uint64_t storage_limit_bits = 0;  // usable bits after the reservation
    uint64_t n_max = 0;               // storage_limit_bits / bits_per_key
    uint64_t n_recommended = 0;
    double f_actual = 0.0;
};

Recommendation recommend_system(const SystemParams& system);

// CSV with a header row:
//   name,p_dark,mu,distance_km,loss_db,eta_d,storage_bits,reserved_bits,bits_per_key
// Blank lines and lines starting with '#' are skipped. Storage columns
// are explicit bit counts; no unit suffixes.
std::vector<SystemParams> load_systems_csv(std::istream& in);
std::vector<SystemParams> load_systems_csv_file(const std::string& path);

}  // namespace mzrl
