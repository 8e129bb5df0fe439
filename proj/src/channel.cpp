#include "lasim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace lasim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

void ChannelScenario::validate() const {
    if (num_ues < 1) {
        throw std::invalid_argument("scenario: num_ues must be >= 1");
    }
    if (static_cast<int>(mean_sinr_db.size()) != num_ues) {
        throw std::invalid_argument("scenario: mean_sinr_db length must equal num_ues");
    }
    if (!(shadow_rho >= 0.0 && shadow_rho < 1.0)) {
        throw std::invalid_argument("scenario: shadow_rho must be in [0,1)");
    }
    if (shadow_sigma_db < 0.0) {
        throw std::invalid_argument("scenario: shadow_sigma_db must be >= 0");
    }
    if (!(doppler_corr >= 0.0 && doppler_corr < 1.0)) {
        throw std::invalid_argument("scenario: doppler_corr must be in [0,1)");
    }
    if (num_slots < 1) {
        throw std::invalid_argument("scenario: num_slots must be >= 1");
    }
}

ChannelScenario ChannelScenario::paper_3ue() {
    ChannelScenario s;
    s.num_ues = 3;
    s.mean_sinr_db = {26.0, 6.0, 28.0};
    s.shadow_rho = 0.995;
    s.shadow_sigma_db = 3.0;
    s.fast_fading = true;
    s.doppler_corr = 0.994;
    s.num_slots = 1000;
    s.seed = 1;
    return s;
}

ChannelScenario ChannelScenario::named(const std::string& name) {
    if (name == "paper-3ue") {
        return paper_3ue();
    }
    if (name == "single-10db") {
        ChannelScenario s;
        s.num_ues = 1;
        s.mean_sinr_db = {10.0};
        return s;
    }
    throw std::invalid_argument("unknown scenario '" + name + "'");
}

std::uint64_t SinrTrace::content_hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffULL;
            h *= 1099511628211ULL;
        }
    };
    for (const auto& ue : sinr_db) {
        for (double x : ue) {
            std::uint64_t bits;
            static_assert(sizeof(bits) == sizeof(x));
            std::memcpy(&bits, &x, sizeof(bits));
            mix(bits);
        }
    }
    return h;
}

SinrTrace generate(const ChannelScenario& scenario, int realization) {
    scenario.validate();
    SinrTrace trace;
    trace.realization = realization;
    trace.sinr_db.resize(static_cast<size_t>(scenario.num_ues));

    const double rho = scenario.shadow_rho;
    const double sigma = scenario.shadow_sigma_db;
    const double innov_scale = sigma * std::sqrt(1.0 - rho * rho);
    const double c = scenario.doppler_corr;
    const double fade_innov = std::sqrt(1.0 - c * c);

    for (int u = 0; u < scenario.num_ues; ++u) {
        const double mu = scenario.mean_sinr_db[static_cast<size_t>(u)];
        std::mt19937_64 rng(splitmix64(scenario.seed ^ splitmix64(0x5eedULL + static_cast<std::uint64_t>(realization)) ^
                                       splitmix64(0xabcdULL + static_cast<std::uint64_t>(u))));
        std::normal_distribution<double> gauss(0.0, 1.0);

        auto& out = trace.sinr_db[static_cast<size_t>(u)];
        out.resize(static_cast<size_t>(scenario.num_slots));

        double shadow = mu;
        // Stationary complex fading gain, unit variance.
        std::complex<double> h(gauss(rng) * M_SQRT1_2, gauss(rng) * M_SQRT1_2);
        for (int t = 0; t < scenario.num_slots; ++t) {
            double v = shadow;
            if (scenario.fast_fading) {
                const double power = std::max(std::norm(h), 1e-12);
                v += 10.0 * std::log10(power);
            }
            out[static_cast<size_t>(t)] = v;

            shadow = mu + rho * (shadow - mu) + innov_scale * gauss(rng);
            if (scenario.fast_fading) {
                std::complex<double> z(gauss(rng) * M_SQRT1_2, gauss(rng) * M_SQRT1_2);
                h = c * h + fade_innov * z;
            }
        }
    }
    return trace;
}

SinrTrace load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open trace file '" + path + "'");
    }
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) {
        throw std::runtime_error("trace '" + path + "': empty file");
    }
    ++line_no;
    if (line != "slot,ue,sinr_db") {
        throw std::runtime_error("trace '" + path + "': expected header 'slot,ue,sinr_db'");
    }

    struct Cell {
        int slot, ue;
        double value;
    };
    std::vector<Cell> cells;
    int max_slot = -1, max_ue = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream ss(line);
        Cell c{};
        char s1 = 0, s2 = 0;
        if (!(ss >> c.slot >> s1 >> c.ue >> s2 >> c.value) || s1 != ',' || s2 != ',') {
            throw std::runtime_error("trace '" + path + "': malformed row at line " + std::to_string(line_no));
        }
        if (!std::isfinite(c.value)) {
            throw std::runtime_error("trace '" + path + "': non-finite sinr_db at line " + std::to_string(line_no));
        }
        if (c.slot < 0 || c.ue < 0) {
            throw std::runtime_error("trace '" + path + "': negative slot/ue at line " + std::to_string(line_no));
        }
        max_slot = std::max(max_slot, c.slot);
        max_ue = std::max(max_ue, c.ue);
        cells.push_back(c);
    }
    if (cells.empty()) {
        throw std::runtime_error("trace '" + path + "': no data rows");
    }

    const int num_ues = max_ue + 1;
    const int num_slots = max_slot + 1;
    SinrTrace trace;
    trace.sinr_db.assign(static_cast<size_t>(num_ues),
                         std::vector<double>(static_cast<size_t>(num_slots), std::numeric_limits<double>::quiet_NaN()));
    std::vector<std::vector<bool>> seen(static_cast<size_t>(num_ues),
                                        std::vector<bool>(static_cast<size_t>(num_slots), false));
    for (const Cell& c : cells) {
        if (seen[static_cast<size_t>(c.ue)][static_cast<size_t>(c.slot)]) {
            throw std::runtime_error("trace '" + path + "': duplicate cell (slot " + std::to_string(c.slot) +
                                     ", ue " + std::to_string(c.ue) + ")");
        }
        seen[static_cast<size_t>(c.ue)][static_cast<size_t>(c.slot)] = true;
        trace.sinr_db[static_cast<size_t>(c.ue)][static_cast<size_t>(c.slot)] = c.value;
    }
    for (int u = 0; u < num_ues; ++u) {
        for (int t = 0; t < num_slots; ++t) {
            if (!seen[static_cast<size_t>(u)][static_cast<size_t>(t)]) {
                throw std::runtime_error("trace '" + path + "': missing cell (slot " + std::to_string(t) + ", ue " +
                                         std::to_string(u) + ")");
            }
        }
    }
    return trace;
}

void save_trace(const SinrTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write trace file '" + path + "'");
    }
    out << "slot,ue,sinr_db\n";
    char buf[64];
    for (int t = 0; t < trace.num_slots(); ++t) {
        for (int u = 0; u < trace.num_ues(); ++u) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", t, u, trace.sinr_db[static_cast<size_t>(u)][static_cast<size_t>(t)]);
            out << buf;
        }
    }
}

} // namespace lasim
