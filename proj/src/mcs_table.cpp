#include "lasim/mcs_table.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#ifndef LASIM_DEFAULT_MCS_TABLE
#define LASIM_DEFAULT_MCS_TABLE "data/mcs_table1.csv"
#endif

namespace lasim {

namespace {

constexpr double kRateDenominator = 1024.0;

void validate(const std::vector<McsEntry>& entries, const std::string& path) {
    if (entries.empty()) {
        throw std::runtime_error("MCS table '" + path + "' has no rows");
    }
    for (size_t i = 0; i < entries.size(); ++i) {
        const McsEntry& e = entries[i];
        if (e.index != static_cast<int>(i)) {
            throw std::runtime_error("MCS table '" + path + "': indices must be contiguous from 0, got " +
                                     std::to_string(e.index) + " at row " + std::to_string(i));
        }
        if (e.mod_order != 2 && e.mod_order != 4 && e.mod_order != 6) {
            throw std::runtime_error("MCS table '" + path + "': mod_order must be one of {2,4,6}, got " +
                                     std::to_string(e.mod_order) + " at index " + std::to_string(e.index));
        }
        if (!(e.code_rate > 0.0 && e.code_rate < 1.0)) {
            throw std::runtime_error("MCS table '" + path + "': code_rate out of (0,1) at index " +
                                     std::to_string(e.index));
        }
        if (i > 0 && !(entries[i - 1].se_nom < e.se_nom)) {
            throw std::runtime_error("MCS table '" + path + "': se_nom must strictly increase, violated at index " +
                                     std::to_string(e.index));
        }
    }
}

} // namespace

McsTable McsTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open MCS table file '" + path + "'");
    }
    McsTable table;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream ss(line);
        McsEntry e;
        int rate_num = 0;
        char c1 = 0, c2 = 0;
        if (!(ss >> e.index >> c1 >> e.mod_order >> c2 >> rate_num) || c1 != ',' || c2 != ',') {
            throw std::runtime_error("MCS table '" + path + "': malformed row at line " + std::to_string(line_no));
        }
        e.code_rate = rate_num / kRateDenominator;
        e.se_nom = e.mod_order * e.code_rate;
        table.entries_.push_back(e);
    }
    validate(table.entries_, path);
    return table;
}

const McsTable& McsTable::table1() {
    static const McsTable table = load(LASIM_DEFAULT_MCS_TABLE);
    return table;
}

const McsEntry& McsTable::lookup(int index) const {
    if (index < 0 || index >= size()) {
        throw std::out_of_range("MCS index " + std::to_string(index) + " outside [0," +
                                std::to_string(max_index()) + "]");
    }
    return entries_[static_cast<size_t>(index)];
}

} // namespace lasim
