#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lasim/link_env.hpp"

namespace lasim {

/// Raw per-slot samples accumulated over evaluation episodes.
struct MetricsAccumulator {
    std::vector<double> slot_se;      // per-slot delivered SE per scheduled UE
    std::vector<double> bler_window;  // per (slot, ue) sliding-window BLER estimate
    std::vector<int> mcs;             // per scheduled (slot, ue)
    long long nacks = 0;
    long long scheduled = 0;
    std::vector<std::array<long long, 29>> per_ue_mcs;
    double reward_sum = 0.0;
    long long slots = 0;

    void ensure_ues(int num_ues);
    void add_slot(const SlotResult& result, const std::vector<double>& per_ue_window_bler);
    void merge(const MetricsAccumulator& other);
};

struct CdfTable {
    std::vector<double> value;
    std::vector<double> cumulative_prob;
};

/// Empirical CDF sampled at `points` evenly spaced quantiles.
CdfTable make_cdf(std::vector<double> samples, int points = 200);

double median_of(std::vector<double> samples);

struct MetricsSummary {
    double mean_se = 0.0;
    double median_se = 0.0;
    double mean_bler = 0.0;
    double median_bler = 0.0;
    double median_mcs = 0.0;
    long long scheduled = 0;
    long long slots = 0;
    std::vector<std::array<double, 29>> per_ue_mcs_hist;
    CdfTable se_cdf, bler_cdf, mcs_cdf;

    static MetricsSummary from(const MetricsAccumulator& acc);
};

/// Total-variation distance between two normalized histograms.
double tv_distance(const std::array<double, 29>& p, const std::array<double, 29>& q);

} // namespace lasim
