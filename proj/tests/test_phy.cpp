#include <doctest.h>

#include <cmath>
#include <random>

#include "lasim/phy_abstraction.hpp"

using namespace lasim;

TEST_CASE("bler is 0.5 at the logistic midpoint for every MCS") {
    const McsTable& t = McsTable::table1();
    const BlerModel m;
    for (int mcs = 0; mcs < t.size(); ++mcs) {
        CHECK(bler(m, t, mcs, gamma50_db(m, t, mcs)) == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("gamma50 of MCS 10 matches the hand-evaluated constant") {
    // k=2, L=2: 10*log10(2^(1360/1024) - 1) + 2 = 3.792 dB.
    const McsTable& t = McsTable::table1();
    const BlerModel m{2.0, 2.0};
    CHECK(gamma50_db(m, t, 10) == doctest::Approx(3.792).epsilon(2e-3));
}

TEST_CASE("bler limits and monotonicity") {
    const McsTable& t = McsTable::table1();
    const BlerModel m;
    CHECK(bler(m, t, 10, 1000.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(bler(m, t, 10, -1000.0) == doctest::Approx(1.0).epsilon(1e-12));

    for (int mcs = 0; mcs < t.size(); ++mcs) {
        double prev = 1.1;
        for (double g = -15.0; g <= 35.0; g += 0.25) {
            const double b = bler(m, t, mcs, g);
            CHECK(b < prev);
            CHECK(b > 0.0);
            CHECK(b < 1.0);
            prev = b;
        }
    }
    for (double g = -5.0; g <= 30.0; g += 1.0) {
        for (int mcs = 0; mcs + 1 < t.size(); ++mcs) {
            CHECK(bler(m, t, mcs, g) < bler(m, t, mcs + 1, g));
        }
    }
}

TEST_CASE("expected SE has a unique interior maximizer at mid SINR") {
    const McsTable& t = McsTable::table1();
    const BlerModel m;
    for (double g : {6.0, 10.0, 14.0}) {
        int best = 0;
        double best_v = -1.0;
        for (int mcs = 0; mcs < t.size(); ++mcs) {
            const double v = t.se_nom(mcs) * (1.0 - bler(m, t, mcs, g));
            if (v > best_v) {
                best_v = v;
                best = mcs;
            }
        }
        CHECK(best > 0);
        CHECK(best < t.max_index());
        // Strictly better than both neighbors: interior and locally unique.
        CHECK(best_v > t.se_nom(best - 1) * (1.0 - bler(m, t, best - 1, g)));
        CHECK(best_v > t.se_nom(best + 1) * (1.0 - bler(m, t, best + 1, g)));
    }
}

TEST_CASE("sample_harq matches its Bernoulli parameter") {
    const McsTable& t = McsTable::table1();
    const BlerModel m;
    std::mt19937_64 rng(42);

    SUBCASE("midpoint gives ~0.5 ACK rate") {
        const double g = gamma50_db(m, t, 12);
        int acks = 0;
        for (int i = 0; i < 10000; ++i) {
            acks += sample_harq(m, t, 12, g, rng) == Harq::Ack;
        }
        CHECK(std::abs(acks / 10000.0 - 0.5) < 0.02);
    }
    SUBCASE("deep in the ACK region the rate exceeds 0.999") {
        const double g = gamma50_db(m, t, 12) + 20.0 / m.slope_per_db;
        int acks = 0;
        for (int i = 0; i < 10000; ++i) {
            acks += sample_harq(m, t, 12, g, rng) == Harq::Ack;
        }
        CHECK(acks / 10000.0 > 0.999);
    }
    SUBCASE("empirical rate tracks 1-bler within binomial bounds") {
        for (double offset : {-1.0, 0.5, 1.5}) {
            const double g = gamma50_db(m, t, 8) + offset;
            const double p = 1.0 - bler(m, t, 8, g);
            int acks = 0;
            const int n = 20000;
            for (int i = 0; i < n; ++i) {
                acks += sample_harq(m, t, 8, g, rng) == Harq::Ack;
            }
            const double sigma = std::sqrt(p * (1.0 - p) / n);
            CHECK(std::abs(acks / static_cast<double>(n) - p) < 5.0 * sigma + 1e-9);
        }
    }
    SUBCASE("fixed seed reproduces the outcome sequence") {
        std::mt19937_64 r1(7), r2(7);
        for (int i = 0; i < 200; ++i) {
            CHECK(sample_harq(m, t, 5, 3.0, r1) == sample_harq(m, t, 5, 3.0, r2));
        }
    }
}

TEST_CASE("report_effective_sinr applies delay, quantization and clamping") {
    SinrTrace trace;
    trace.sinr_db = {{1.0, 2.0, 3.0, 4.0, 6.4, 5.0}};

    SUBCASE("pure delay") {
        const FeedbackConfig cfg{1, 0.0};
        CHECK(report_effective_sinr(trace, cfg, 5, 0) == doctest::Approx(6.4));
    }
    SUBCASE("delay plus 1 dB rounding") {
        const FeedbackConfig cfg{3, 1.0};
        // slot 7 -> slot 4 value 6.4 -> 6.0
        CHECK(report_effective_sinr(trace, cfg, 7, 0) == doctest::Approx(6.0));
    }
    SUBCASE("early slots clamp to slot 0") {
        const FeedbackConfig cfg{3, 0.0};
        CHECK(report_effective_sinr(trace, cfg, 1, 0) == doctest::Approx(1.0));
        CHECK(report_effective_sinr(trace, cfg, 0, 0) == doctest::Approx(1.0));
    }
    SUBCASE("config validation") {
        FeedbackConfig cfg;
        cfg.report_delay_slots = 0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
}
