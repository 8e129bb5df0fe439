#pragma once

#include <random>

#include "lasim/channel.hpp"
#include "lasim/mcs_table.hpp"

namespace lasim {

/// Logistic SINR->BLER family. The 50% point of MCS m sits at the Shannon
/// SINR for its nominal spectral efficiency plus an implementation loss:
///   gamma50(m) = 10*log10(2^se_nom(m) - 1) + impl_loss_db
///   bler(m, g) = 1 / (1 + exp(slope_per_db * (g - gamma50(m))))
struct BlerModel {
    double slope_per_db = 2.0;
    double impl_loss_db = 2.0;
};

enum class Harq { Nack = 0, Ack = 1 };

double gamma50_db(const BlerModel& model, const McsTable& table, int mcs);
double bler(const BlerModel& model, const McsTable& table, int mcs, double sinr_db);

/// Bernoulli HARQ outcome: ACK with probability 1 - bler.
Harq sample_harq(const BlerModel& model, const McsTable& table, int mcs, double sinr_db, std::mt19937_64& rng);

/// CQI surrogate: reports are delayed by a fixed number of slots and rounded
/// to a quantization grid.
struct FeedbackConfig {
    int report_delay_slots = 3;   // >= 1
    double quant_step_db = 1.0;   // 0 disables quantization

    void validate() const;
};

/// SINR report available at `slot`: the true value of slot max(0, slot - d),
/// rounded to the nearest quant_step_db multiple.
double report_effective_sinr(const SinrTrace& trace, const FeedbackConfig& cfg, int slot, int ue);

} // namespace lasim
