#ifndef MESS_DATASET_HPP
#define MESS_DATASET_HPP

#include <array>
#include <istream>
#include <string>
#include <vector>

#include "mess/fit.hpp"

namespace mess {

// One row of the long-format input CSV. Missing observations are absent
// rows, never sentinel values.
struct LongRecord {
    std::string gene;
    std::string group;
    std::string individual;
    double time;
    double value;
};

struct SkipEntry {
    std::string gene;
    std::string reason;
};

struct Dataset {
    std::array<std::string, 2> group_labels;
    std::vector<GenePair> genes;         // genes that pass model preconditions
    std::vector<SkipEntry> skipped;      // quarantined genes, one entry each
};

// Parse the long-format CSV `gene,group,individual,time,value`. Malformed
// rows, duplicate keys and a group count other than two are hard errors;
// genes violating model preconditions are quarantined, not fatal.
Dataset ingest(std::istream& in);
Dataset ingest_file(const std::string& path);

std::vector<LongRecord> parse_long_csv(std::istream& in);
Dataset assemble(const std::vector<LongRecord>& records);

}  // namespace mess

#endif
