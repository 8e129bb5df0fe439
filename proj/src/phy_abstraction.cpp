#include "lasim/phy_abstraction.hpp"

#include <cmath>
#include <stdexcept>

namespace lasim {

double gamma50_db(const BlerModel& model, const McsTable& table, int mcs) {
    const double se = table.se_nom(mcs);
    return 10.0 * std::log10(std::exp2(se) - 1.0) + model.impl_loss_db;
}

double bler(const BlerModel& model, const McsTable& table, int mcs, double sinr_db) {
    const double x = model.slope_per_db * (sinr_db - gamma50_db(model, table, mcs));
    // 1/(1+e^x) evaluated stably for large |x|.
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

Harq sample_harq(const BlerModel& model, const McsTable& table, int mcs, double sinr_db, std::mt19937_64& rng) {
    const double p_fail = bler(model, table, mcs, sinr_db);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return unif(rng) < p_fail ? Harq::Nack : Harq::Ack;
}

void FeedbackConfig::validate() const {
    if (report_delay_slots < 1) {
        throw std::invalid_argument("feedback: report_delay_slots must be >= 1");
    }
    if (quant_step_db < 0.0) {
        throw std::invalid_argument("feedback: quant_step_db must be >= 0");
    }
}

double report_effective_sinr(const SinrTrace& trace, const FeedbackConfig& cfg, int slot, int ue) {
    const int src = std::max(0, slot - cfg.report_delay_slots);
    double v = trace.sinr_db[static_cast<size_t>(ue)][static_cast<size_t>(std::min(src, trace.num_slots() - 1))];
    if (cfg.quant_step_db > 0.0) {
        v = std::round(v / cfg.quant_step_db) * cfg.quant_step_db;
    }
    return v;
}

} // namespace lasim
