#pragma once

#include <string>
#include <vector>

namespace lasim {

/// One row of the MCS catalog.
struct McsEntry {
    int index = 0;
    int mod_order = 2;       // bits per symbol
    double code_rate = 0.0;  // in (0,1)
    double se_nom = 0.0;     // mod_order * code_rate, bits/s/Hz
};

/// MCS index -> (modulation order, code rate) catalog, loaded from a
/// plain-text file with lines `index,mod_order,rate_numerator` where the
/// rate denominator is fixed at 1024. Immutable after load.
class McsTable {
public:
    static McsTable load(const std::string& path);

    /// Bundled 29-entry default (NR MCS table for up-to-64QAM). Cached.
    static const McsTable& table1();

    const McsEntry& lookup(int index) const;
    double se_nom(int index) const { return lookup(index).se_nom; }

    int size() const { return static_cast<int>(entries_.size()); }
    int max_index() const { return size() - 1; }
    const std::vector<McsEntry>& entries() const { return entries_; }

private:
    std::vector<McsEntry> entries_;
};

} // namespace lasim
