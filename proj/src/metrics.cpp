#include "lasim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lasim {

void MetricsAccumulator::ensure_ues(int num_ues) {
    if (static_cast<int>(per_ue_mcs.size()) < num_ues) {
        per_ue_mcs.resize(static_cast<size_t>(num_ues), std::array<long long, 29>{});
    }
}

void MetricsAccumulator::add_slot(const SlotResult& result, const std::vector<double>& per_ue_window_bler) {
    ensure_ues(static_cast<int>(result.ue.size()));
    double se = 0.0;
    int sched = 0;
    for (size_t u = 0; u < result.ue.size(); ++u) {
        const UeSlotResult& r = result.ue[u];
        bler_window.push_back(per_ue_window_bler[u]);
        if (!r.scheduled) {
            continue;
        }
        ++sched;
        ++scheduled;
        se += r.se_achieved;
        if (r.harq == 0) {
            ++nacks;
        }
        mcs.push_back(r.mcs);
        per_ue_mcs[u][static_cast<size_t>(r.mcs)] += 1;
    }
    slot_se.push_back(sched > 0 ? se / sched : 0.0);
    reward_sum += result.reward;
    ++slots;
}

void MetricsAccumulator::merge(const MetricsAccumulator& other) {
    ensure_ues(static_cast<int>(other.per_ue_mcs.size()));
    slot_se.insert(slot_se.end(), other.slot_se.begin(), other.slot_se.end());
    bler_window.insert(bler_window.end(), other.bler_window.begin(), other.bler_window.end());
    mcs.insert(mcs.end(), other.mcs.begin(), other.mcs.end());
    nacks += other.nacks;
    scheduled += other.scheduled;
    for (size_t u = 0; u < other.per_ue_mcs.size(); ++u) {
        for (size_t m = 0; m < 29; ++m) {
            per_ue_mcs[u][m] += other.per_ue_mcs[u][m];
        }
    }
    reward_sum += other.reward_sum;
    slots += other.slots;
}

CdfTable make_cdf(std::vector<double> samples, int points) {
    CdfTable cdf;
    if (samples.empty() || points < 2) {
        return cdf;
    }
    std::sort(samples.begin(), samples.end());
    cdf.value.reserve(static_cast<size_t>(points));
    cdf.cumulative_prob.reserve(static_cast<size_t>(points));
    const auto n = static_cast<double>(samples.size());
    for (int i = 0; i < points; ++i) {
        const double q = static_cast<double>(i) / static_cast<double>(points - 1);
        const auto idx = static_cast<size_t>(std::min(n - 1.0, std::floor(q * (n - 1.0) + 0.5)));
        cdf.value.push_back(samples[idx]);
        cdf.cumulative_prob.push_back(q);
    }
    return cdf;
}

double median_of(std::vector<double> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("median_of: empty sample set");
    }
    std::sort(samples.begin(), samples.end());
    const size_t n = samples.size();
    if (n % 2 == 1) {
        return samples[n / 2];
    }
    return 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

MetricsSummary MetricsSummary::from(const MetricsAccumulator& acc) {
    MetricsSummary s;
    s.scheduled = acc.scheduled;
    s.slots = acc.slots;
    if (!acc.slot_se.empty()) {
        double sum = 0.0;
        for (double v : acc.slot_se) {
            sum += v;
        }
        s.mean_se = sum / static_cast<double>(acc.slot_se.size());
        s.median_se = median_of(acc.slot_se);
    }
    s.mean_bler = acc.scheduled > 0 ? static_cast<double>(acc.nacks) / static_cast<double>(acc.scheduled) : 0.0;
    if (!acc.bler_window.empty()) {
        s.median_bler = median_of(acc.bler_window);
    }
    if (!acc.mcs.empty()) {
        std::vector<double> m(acc.mcs.begin(), acc.mcs.end());
        s.median_mcs = median_of(m);
        s.mcs_cdf = make_cdf(std::move(m));
    }
    s.se_cdf = make_cdf(acc.slot_se);
    s.bler_cdf = make_cdf(acc.bler_window);
    s.per_ue_mcs_hist.resize(acc.per_ue_mcs.size());
    for (size_t u = 0; u < acc.per_ue_mcs.size(); ++u) {
        long long total = 0;
        for (long long c : acc.per_ue_mcs[u]) {
            total += c;
        }
        for (size_t m = 0; m < 29; ++m) {
            s.per_ue_mcs_hist[u][m] = total > 0 ? static_cast<double>(acc.per_ue_mcs[u][m]) / total : 0.0;
        }
    }
    return s;
}

double tv_distance(const std::array<double, 29>& p, const std::array<double, 29>& q) {
    double sum = 0.0;
    for (size_t i = 0; i < 29; ++i) {
        sum += std::abs(p[i] - q[i]);
    }
    return 0.5 * sum;
}

} // namespace lasim
