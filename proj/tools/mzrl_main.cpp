// Command-line front end: parameter solving, file encode/decode,
// end-to-end sifting simulation, efficiency sweeps and per-system
// recommendations.
//
// Exit codes: 0 success, 1 I/O or corrupt-stream errors, 2 domain errors
// (count rate or parameters outside the supported range).

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mzrl/codec.hpp"
#include "mzrl/errors.hpp"
#include "mzrl/optimizer.hpp"
#include "mzrl/recommend.hpp"
#include "mzrl/sifter.hpp"
#include "mzrl/theory.hpp"

namespace {

using nlohmann::json;

// Counts may be written as plain integers, scientific notation ("1e8"),
// powers ("2^30") or scaled powers ("12*2^10").
uint64_t parse_count(const std::string& text) {
    const auto bad = [&] {
        return std::invalid_argument("cannot parse count: \"" + text + "\"");
    };
    const auto parse_plain = [&](const std::string& s) -> uint64_t {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            throw bad();
        }
        if (used != s.size() || v < 0.0 || v != std::floor(v) || v > 9.2e18) throw bad();
        return static_cast<uint64_t>(v);
    };
    uint64_t scale = 1;
    std::string rest = text;
    if (const auto star = rest.find('*'); star != std::string::npos) {
        scale = parse_plain(rest.substr(0, star));
        rest = rest.substr(star + 1);
    }
    if (const auto caret = rest.find('^'); caret != std::string::npos) {
        const uint64_t base = parse_plain(rest.substr(0, caret));
        const uint64_t exp = parse_plain(rest.substr(caret + 1));
        if (base < 2 || exp > 63) throw bad();
        uint64_t value = 1;
        for (uint64_t i = 0; i < exp; ++i) {
            if (value > UINT64_MAX / base) throw bad();
            value *= base;
        }
        if (scale != 0 && value > UINT64_MAX / std::max<uint64_t>(scale, 1)) throw bad();
        return scale * value;
    }
    if (scale != 1) return scale * parse_plain(rest);
    return parse_plain(rest);
}

uint64_t default_seed() {
    if (const char* env = std::getenv("MZRL_SEED")) {
        try {
            return parse_count(env);
        } catch (const std::exception&) {
            throw std::invalid_argument("MZRL_SEED is not a valid count");
        }
    }
    return 1;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void print_kv(const char* key, const std::string& value) {
    std::printf("%-22s %s\n", key, value.c_str());
}

// ------------------------------------------------------------------- solve

struct SolveOpts {
    double q = 0.0;
    std::string n_max;
    bool as_json = false;
};

void run_solve(const SolveOpts& opts) {
    mzrl::OptimizerResult result;
    std::optional<uint64_t> n_max;
    if (!opts.n_max.empty()) n_max = parse_count(opts.n_max);
    if (n_max)
        result = mzrl::solve_constrained(opts.q, *n_max);
    else
        result = mzrl::solve_unconstrained(opts.q);
    const double entropy = mzrl::binary_entropy(opts.q);
    const double f = result.codelength / entropy;

    if (opts.as_json) {
        json out{{"q", opts.q},
                 {"k_opt", result.k_opt},
                 {"n_opt", result.n_opt},
                 {"codelength", result.codelength},
                 {"entropy", entropy},
                 {"efficiency", f},
                 {"iterations", result.iterations}};
        if (n_max) out["n_max"] = *n_max;
        std::printf("%s\n", out.dump().c_str());
        return;
    }
    print_kv("q", fmt_double(opts.q));
    if (n_max) print_kv("n_max", std::to_string(*n_max));
    print_kv("k_opt", std::to_string(result.k_opt));
    print_kv("n_opt", std::to_string(result.n_opt));
    print_kv("L", fmt_double(result.codelength));
    print_kv("h(q)", fmt_double(entropy));
    print_kv("f", fmt_double(f));
    print_kv("iterations", std::to_string(result.iterations));
}

// ----------------------------------------------------------- encode/decode

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                                std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

struct CodecOpts {
    std::string input;
    std::string output;
    std::string n;
};

void run_encode(const CodecOpts& opts) {
    const uint64_t n = parse_count(opts.n);
    if (n < 2 || n > (uint64_t{1} << 31))
        throw std::invalid_argument("n must lie in [2, 2^31]");
    const auto params = mzrl::CodeParams::from_alphabet_size(static_cast<uint32_t>(n));
    auto bytes = read_file(opts.input);
    const uint64_t bits = bytes.size() * 8;
    const auto stream =
        mzrl::encode_stream(mzrl::BitSequence::from_bytes(std::move(bytes), bits), params);
    const auto out = stream.serialize();
    write_file(opts.output, out);
    print_kv("source_bits", std::to_string(stream.source_bit_count));
    print_kv("codewords", std::to_string(stream.codeword_count));
    print_kv("container_bytes", std::to_string(out.size()));
    if (stream.source_bit_count > 0)
        print_kv("code_bits_per_source_bit",
                 fmt_double(static_cast<double>(stream.codeword_count) * params.k /
                            static_cast<double>(stream.source_bit_count)));
}

void run_decode(const CodecOpts& opts) {
    const auto bytes = read_file(opts.input);
    const auto stream = mzrl::CodewordStream::parse(bytes);
    const auto bits = mzrl::decode_stream(stream);
    // Bit counts that are not a multiple of eight pad the final byte
    // with zeros; encode always produces whole bytes.
    write_file(opts.output, bits.bytes());
    print_kv("source_bits", std::to_string(bits.size()));
    print_kv("output_bytes", std::to_string(bits.bytes().size()));
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
    std::string m;
    double q = -1.0;
    double p_dark = -1.0, mu = -1.0, loss_db = -1.0, eta_d = -1.0;
    double distance_km = 0.0;
    std::string n;
    std::string seed;
    double t_rf = 0.0;
    bool as_json = false;
    bool as_csv = false;
};

void run_simulate(const SimulateOpts& opts) {
    mzrl::SessionConfig config;
    config.pulses = parse_count(opts.m);
    if (opts.q >= 0.0) {
        config.q = opts.q;
    } else {
        if (opts.p_dark < 0.0 || opts.mu < 0.0 || opts.loss_db < 0.0 || opts.eta_d < 0.0)
            throw std::invalid_argument(
                "specify --q or all of --p-dark --mu --loss-db --eta-d");
        auto link = mzrl::LinkBudget::with_combined_loss(opts.p_dark, opts.mu,
                                                         opts.loss_db, opts.eta_d);
        link.distance_km = opts.distance_km;
        config.q = mzrl::count_rate(link);
        config.link = link;
    }
    if (config.pulses > 0 && !(config.q > 0.0 && config.q < 1.0))
        throw std::domain_error("count rate must lie in (0, 1)");

    uint64_t n = 0;
    if (!opts.n.empty()) {
        n = parse_count(opts.n);
    } else {
        if (config.pulses > 0) n = mzrl::solve_unconstrained(config.q).n_opt;
        else n = 2;
    }
    if (n < 2 || n > (uint64_t{1} << 31))
        throw std::invalid_argument("n must lie in [2, 2^31]; pass --n explicitly");
    config.params = mzrl::CodeParams::from_alphabet_size(static_cast<uint32_t>(n));
    config.seed = opts.seed.empty() ? default_seed() : parse_count(opts.seed);
    if (opts.t_rf > 0.0) {
        config.link.t_rf_s = opts.t_rf;
        // Fibre propagation at 2.0e8 m/s in both directions.
        const double fibre = opts.distance_km * 1000.0 / 2.0e8;
        config.link.t2_s = fibre;
        config.link.t4_s = fibre;
    }

    const auto result = mzrl::run_session(config);
    const auto& r = result.report;
    if (opts.as_json) {
        json out{{"source_bits", r.source_bits},
                 {"code_bits_sent", r.code_bits_sent},
                 {"raw_keys", r.raw_keys},
                 {"empirical_codelength", r.empirical_codelength},
                 {"empirical_efficiency", r.empirical_efficiency},
                 {"key_consumption_bits", r.key_consumption_bits},
                 {"buffer_peak", r.buffer_peak},
                 {"n", config.params.n},
                 {"q", config.q},
                 {"seed", config.seed}};
        std::printf("%s\n", out.dump().c_str());
        return;
    }
    if (opts.as_csv) {
        std::printf(
            "source_bits,code_bits_sent,raw_keys,empirical_codelength,"
            "empirical_efficiency,key_consumption_bits,buffer_peak\n");
        std::printf("%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%s,%s,%" PRIu64 ",%" PRIu64 "\n",
                    r.source_bits, r.code_bits_sent, r.raw_keys,
                    fmt_double(r.empirical_codelength).c_str(),
                    fmt_double(r.empirical_efficiency).c_str(), r.key_consumption_bits,
                    r.buffer_peak);
        return;
    }
    print_kv("source_bits", std::to_string(r.source_bits));
    print_kv("code_bits_sent", std::to_string(r.code_bits_sent));
    print_kv("raw_keys", std::to_string(r.raw_keys));
    print_kv("empirical_codelength", fmt_double(r.empirical_codelength));
    print_kv("empirical_efficiency", fmt_double(r.empirical_efficiency));
    print_kv("key_consumption_bits", std::to_string(r.key_consumption_bits));
    print_kv("buffer_peak", std::to_string(r.buffer_peak));
    print_kv("n", std::to_string(config.params.n));
    print_kv("q", fmt_double(config.q));
    print_kv("seed", std::to_string(config.seed));
}

// ------------------------------------------------------------------- sweep

struct SweepOpts {
    double q_min = 1e-6;
    double q_max = 1e-1;
    std::size_t points = 100;
    std::string output = "-";
};

void run_sweep(const SweepOpts& opts) {
    const auto rows = mzrl::sweep_grid(opts.q_min, opts.q_max, opts.points);
    std::string csv = "q,k_opt,n_opt,L,h_q,f,iterations\n";
    for (const auto& row : rows) {
        csv += fmt_double(row.q);
        csv += ',';
        csv += std::to_string(row.k_opt);
        csv += ',';
        csv += std::to_string(row.n_opt);
        csv += ',';
        csv += fmt_double(row.codelength);
        csv += ',';
        csv += fmt_double(row.entropy);
        csv += ',';
        csv += fmt_double(row.efficiency);
        csv += ',';
        csv += std::to_string(row.iterations);
        csv += '\n';
    }
    if (opts.output == "-") {
        std::fputs(csv.c_str(), stdout);
        return;
    }
    std::ofstream out(opts.output, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + opts.output);
    out << csv;
    if (!out) throw std::runtime_error("write failed: " + opts.output);
}

// --------------------------------------------------------------- recommend

struct RecommendOpts {
    std::string systems;
    bool as_json = false;
};

void run_recommend(const RecommendOpts& opts) {
    const auto systems = mzrl::load_systems_csv_file(opts.systems);
    std::vector<mzrl::Recommendation> recs;
    recs.reserve(systems.size());
    for (const auto& sys : systems) recs.push_back(mzrl::recommend_system(sys));

    if (opts.as_json) {
        json out = json::array();
        for (const auto& rec : recs)
            out.push_back({{"system", rec.system_name},
                           {"q", rec.q},
                           {"n_theoretical", rec.n_theoretical},
                           {"f_theoretical", rec.f_theoretical},
                           {"storage_limit_bits", rec.storage_limit_bits},
                           {"n_max", rec.n_max},
                           {"n_recommended", rec.n_recommended},
                           {"f_actual", rec.f_actual}});
        std::printf("%s\n", out.dump().c_str());
        return;
    }
    std::printf("%-16s %-12s %-14s %-9s %-12s %-14s %-9s\n", "system", "q",
                "n_theoretical", "f_theory", "n_max", "n_recommended", "f_actual");
    for (const auto& rec : recs)
        std::printf("%-16s %-12s %-14" PRIu64 " %-9.4f %-12" PRIu64 " %-14" PRIu64
                    " %-9.4f\n",
                    rec.system_name.c_str(), fmt_double(rec.q).c_str(),
                    rec.n_theoretical, rec.f_theoretical, rec.n_max, rec.n_recommended,
                    rec.f_actual);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero-run-length bit-sifting toolkit"};
    app.require_subcommand(1);

    auto solve_opts = std::make_shared<SolveOpts>();
    auto* solve = app.add_subcommand("solve", "Optimal codeword width / alphabet size");
    solve->add_option("--q", solve_opts->q, "count rate in [1e-15, 0.1]")->required();
    solve->add_option("--n-max", solve_opts->n_max, "storage cap on the alphabet size");
    solve->add_flag("--json", solve_opts->as_json, "emit JSON");
    solve->callback([solve_opts] { run_solve(*solve_opts); });

    auto encode_opts = std::make_shared<CodecOpts>();
    auto* encode = app.add_subcommand("encode", "Encode a file as a codeword stream");
    encode->add_option("--input", encode_opts->input, "input file")->required();
    encode->add_option("--output", encode_opts->output, "output container")->required();
    encode->add_option("--n", encode_opts->n, "alphabet size (2..2^31)")->required();
    encode->callback([encode_opts] { run_encode(*encode_opts); });

    auto decode_opts = std::make_shared<CodecOpts>();
    auto* decode = app.add_subcommand("decode", "Decode a codeword stream container");
    decode->add_option("--input", decode_opts->input, "input container")->required();
    decode->add_option("--output", decode_opts->output, "output file")->required();
    decode->callback([decode_opts] { run_decode(*decode_opts); });

    auto sim_opts = std::make_shared<SimulateOpts>();
    auto* simulate = app.add_subcommand("simulate", "Run a two-endpoint sifting session");
    simulate->add_option("--m", sim_opts->m, "pulse count (e.g. 1e8, 2^30)")->required();
    simulate->add_option("--q", sim_opts->q, "count rate");
    simulate->add_option("--p-dark", sim_opts->p_dark, "dark count probability");
    simulate->add_option("--mu", sim_opts->mu, "mean photon number");
    simulate->add_option("--loss-db", sim_opts->loss_db, "combined loss (dB)");
    simulate->add_option("--eta-d", sim_opts->eta_d, "detector efficiency");
    simulate->add_option("--distance", sim_opts->distance_km, "fibre length (km)");
    simulate->add_option("--n", sim_opts->n, "alphabet size; solver picks it when omitted");
    simulate->add_option("--seed", sim_opts->seed, "RNG seed (default $MZRL_SEED or 1)");
    simulate->add_option("--t-rf", sim_opts->t_rf,
                         "repetition period in seconds; enables latency modelling");
    simulate->add_flag("--json", sim_opts->as_json, "emit JSON");
    simulate->add_flag("--csv", sim_opts->as_csv, "emit CSV");
    simulate->callback([sim_opts] { run_simulate(*sim_opts); });

    auto sweep_opts = std::make_shared<SweepOpts>();
    auto* sweep = app.add_subcommand("sweep", "Efficiency sweep over a count-rate grid");
    sweep->add_option("--q-min", sweep_opts->q_min, "grid start (default 1e-6)");
    sweep->add_option("--q-max", sweep_opts->q_max, "grid end (default 1e-1)");
    sweep->add_option("--points", sweep_opts->points, "grid size (default 100)");
    sweep->add_option("--output", sweep_opts->output, "CSV path, - for stdout");
    sweep->callback([sweep_opts] { run_sweep(*sweep_opts); });

    auto rec_opts = std::make_shared<RecommendOpts>();
    auto* recommend = app.add_subcommand("recommend", "Per-system alphabet recommendations");
    recommend->add_option("--systems", rec_opts->systems, "system parameter CSV")->required();
    recommend->add_flag("--json", rec_opts->as_json, "emit JSON");
    recommend->callback([rec_opts] { run_recommend(*rec_opts); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const mzrl::SolverDomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const mzrl::StreamError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
