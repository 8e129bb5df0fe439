#include <doctest.h>

#include <cmath>
#include <complex>
#include <fstream>
#include <random>

#include "lasim/channel.hpp"

using namespace lasim;

namespace {

ChannelScenario flat_scenario(double mu, int slots) {
    ChannelScenario s;
    s.num_ues = 1;
    s.mean_sinr_db = {mu};
    s.shadow_sigma_db = 0.0;
    s.fast_fading = false;
    s.num_slots = slots;
    return s;
}

} // namespace

TEST_CASE("degenerate noise gives a constant trace at the mean") {
    const SinrTrace t = generate(flat_scenario(12.5, 200), 0);
    for (double v : t.sinr_db[0]) {
        CHECK(v == doctest::Approx(12.5).epsilon(1e-12));
    }
}

TEST_CASE("same (seed, realization) twice is bit-identical; different realization differs") {
    ChannelScenario s = ChannelScenario::paper_3ue();
    s.num_slots = 300;
    const SinrTrace a = generate(s, 4);
    const SinrTrace b = generate(s, 4);
    CHECK(a.sinr_db == b.sinr_db);
    CHECK(a.content_hash() == b.content_hash());
    const SinrTrace c = generate(s, 5);
    CHECK(a.sinr_db != c.sinr_db);
}

TEST_CASE("paper-3ue shadow process time-averages to the per-UE means") {
    ChannelScenario s = ChannelScenario::paper_3ue();
    s.fast_fading = false;  // LLN check targets the Gauss-Markov track
    s.num_slots = 10000;
    const SinrTrace t = generate(s, 0);
    for (int u = 0; u < 3; ++u) {
        double mean = 0.0;
        for (double v : t.sinr_db[static_cast<size_t>(u)]) {
            mean += v;
        }
        mean /= s.num_slots;
        CHECK(std::abs(mean - s.mean_sinr_db[static_cast<size_t>(u)]) < 1.0);
    }
}

TEST_CASE("stationary shadow statistics: mean, std, lag-1 autocorrelation") {
    ChannelScenario s;
    s.num_ues = 1;
    s.mean_sinr_db = {10.0};
    s.shadow_rho = 0.9;
    s.shadow_sigma_db = 4.0;
    s.fast_fading = false;
    s.num_slots = 200000;
    const SinrTrace t = generate(s, 1);
    const auto& x = t.sinr_db[0];

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= x.size();
    double var = 0.0, cov = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        var += (x[i] - mean) * (x[i] - mean);
        if (i + 1 < x.size()) cov += (x[i] - mean) * (x[i + 1] - mean);
    }
    var /= x.size();
    cov /= (x.size() - 1);

    CHECK(std::abs(mean - 10.0) < 0.2);
    CHECK(std::sqrt(var) == doctest::Approx(4.0).epsilon(0.05));
    CHECK(std::abs(cov / var - s.shadow_rho) < 0.02);
}

TEST_CASE("fast fading power has unit mean") {
    ChannelScenario s;
    s.num_ues = 1;
    s.mean_sinr_db = {0.0};
    s.shadow_sigma_db = 0.0;
    s.fast_fading = true;
    s.doppler_corr = 0.9;
    s.num_slots = 200000;
    const SinrTrace t = generate(s, 2);
    double mean_power = 0.0;
    for (double v : t.sinr_db[0]) {
        mean_power += std::pow(10.0, v / 10.0);  // shadow is 0 dB, so v is the fading gain
    }
    mean_power /= s.num_slots;
    CHECK(mean_power == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("trace CSV round trip and direct parse") {
    SUBCASE("literal two-slot single-UE file") {
        std::ofstream out("tmp_trace_a.csv");
        out << "slot,ue,sinr_db\n0,0,10.0\n1,0,12.0\n";
        out.close();
        const SinrTrace t = load_trace("tmp_trace_a.csv");
        REQUIRE(t.num_ues() == 1);
        REQUIRE(t.num_slots() == 2);
        CHECK(t.sinr_db[0][0] == doctest::Approx(10.0));
        CHECK(t.sinr_db[0][1] == doctest::Approx(12.0));
    }
    SUBCASE("write then load is the identity") {
        ChannelScenario s = ChannelScenario::paper_3ue();
        s.num_slots = 50;
        const SinrTrace t = generate(s, 3);
        save_trace(t, "tmp_trace_b.csv");
        const SinrTrace u = load_trace("tmp_trace_b.csv");
        CHECK(u.sinr_db == t.sinr_db);
    }
}

TEST_CASE("trace parse errors carry the offending location") {
    auto write = [](const std::string& body) {
        std::ofstream out("tmp_trace_err.csv");
        out << body;
    };
    SUBCASE("NaN cell names its line") {
        write("slot,ue,sinr_db\n0,0,10.0\n1,0,nan\n");
        CHECK_THROWS_WITH_AS(load_trace("tmp_trace_err.csv"), doctest::Contains("line 3"), std::runtime_error);
    }
    SUBCASE("missing cell is reported") {
        write("slot,ue,sinr_db\n0,0,10.0\n1,1,12.0\n");
        CHECK_THROWS_WITH_AS(load_trace("tmp_trace_err.csv"), doctest::Contains("missing cell"), std::runtime_error);
    }
    SUBCASE("bad header rejected") {
        write("slot,sinr_db\n");
        CHECK_THROWS_AS(load_trace("tmp_trace_err.csv"), std::runtime_error);
    }
    SUBCASE("duplicate cell rejected") {
        write("slot,ue,sinr_db\n0,0,10.0\n0,0,11.0\n");
        CHECK_THROWS_WITH_AS(load_trace("tmp_trace_err.csv"), doctest::Contains("duplicate"), std::runtime_error);
    }
}

TEST_CASE("scenario validation") {
    ChannelScenario s;
    s.num_ues = 2;
    s.mean_sinr_db = {1.0};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.mean_sinr_db = {1.0, 2.0};
    CHECK_NOTHROW(s.validate());
    s.shadow_rho = 1.0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
