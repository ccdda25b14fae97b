#include "mess/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace mess {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_number(const std::string& s, std::size_t line_no, const char* what) {
    double out;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out))
        throw std::runtime_error("line " + std::to_string(line_no) + ": malformed " + what +
                                 " '" + s + "'");
    return out;
}

}  // namespace

std::vector<LongRecord> parse_long_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    // skip provenance comment lines before the header
    do {
        if (!std::getline(in, line)) throw std::runtime_error("empty input");
        ++line_no;
    } while (!line.empty() && line[0] == '#');
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "gene,group,individual,time,value")
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": expected header 'gene,group,individual,time,value'");

    std::vector<LongRecord> records;
    std::set<std::tuple<std::string, std::string, std::string, std::int64_t>> keys;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 5)
            throw std::runtime_error("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                                     std::to_string(fields.size()));
        LongRecord rec{fields[0], fields[1], fields[2],
                       parse_number(fields[3], line_no, "time"),
                       parse_number(fields[4], line_no, "value")};
        if (rec.gene.empty() || rec.group.empty() || rec.individual.empty())
            throw std::runtime_error("line " + std::to_string(line_no) + ": empty id field");
        auto key = std::make_tuple(rec.gene, rec.group, rec.individual,
                                   static_cast<std::int64_t>(std::llround(rec.time * 1e9)));
        if (!keys.insert(key).second)
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": duplicate (gene,group,individual,time) key");
        records.push_back(std::move(rec));
    }
    return records;
}

Dataset assemble(const std::vector<LongRecord>& records) {
    std::set<std::string> groups;
    for (const auto& r : records) groups.insert(r.group);
    if (groups.size() > 2)
        throw std::runtime_error("expected exactly two groups, found " +
                                 std::to_string(groups.size()));
    if (groups.size() < 2) {
        // nothing is fittable; quarantine every gene rather than fail the run
        Dataset dataset;
        if (!groups.empty()) dataset.group_labels[0] = *groups.begin();
        std::set<std::string> seen;
        for (const auto& r : records)
            if (seen.insert(r.gene).second)
                dataset.skipped.push_back({r.gene, "fewer than two groups present"});
        return dataset;
    }

    Dataset dataset;
    auto it = groups.begin();
    dataset.group_labels[0] = *it++;
    dataset.group_labels[1] = *it;

    // gene -> group -> individual -> (time, value), insertion-ordered genes
    std::vector<std::string> gene_order;
    std::map<std::string, std::map<std::string, std::map<std::string,
        std::vector<std::pair<double, double>>>>> by_gene;
    for (const auto& r : records) {
        if (!by_gene.count(r.gene)) gene_order.push_back(r.gene);
        by_gene[r.gene][r.group][r.individual].emplace_back(r.time, r.value);
    }

    for (const auto& gene_id : gene_order) {
        const auto& gene_groups = by_gene[gene_id];
        try {
            std::vector<double> all_times;
            for (const auto& label : dataset.group_labels) {
                auto git = gene_groups.find(label);
                if (git == gene_groups.end())
                    throw std::runtime_error("group '" + label + "' missing");
                for (const auto& [ind, obs] : git->second)
                    for (const auto& [t, v] : obs) all_times.push_back(t);
            }
            TimeGrid grid = TimeGrid::build(all_times);

            GenePair pair;
            pair.gene = gene_id;
            LongitudinalSample* samples[2] = {&pair.group1, &pair.group2};
            for (int g = 0; g < 2; ++g) {
                LongitudinalSample& sample = *samples[g];
                sample.gene = gene_id;
                sample.group = dataset.group_labels[static_cast<std::size_t>(g)];
                sample.grid = grid;
                const auto& individuals = gene_groups.at(sample.group);
                for (const auto& [ind_id, obs] : individuals) {
                    auto sorted = obs;
                    std::sort(sorted.begin(), sorted.end());
                    std::vector<double> times;
                    Eigen::VectorXd y(static_cast<Eigen::Index>(sorted.size()));
                    for (std::size_t j = 0; j < sorted.size(); ++j) {
                        times.push_back(sorted[j].first);
                        y[static_cast<Eigen::Index>(j)] = sorted[j].second;
                    }
                    if (times.size() < 2) throw std::runtime_error(
                        "individual '" + ind_id + "' has fewer than 2 observations");
                    sample.individuals.push_back(
                        {ind_id, IncidenceMatrix::build(times, grid), std::move(y)});
                }
                sample.validate();
            }
            dataset.genes.push_back(std::move(pair));
        } catch (const std::exception& e) {
            dataset.skipped.push_back({gene_id, e.what()});
        }
    }
    return dataset;
}

Dataset ingest(std::istream& in) { return assemble(parse_long_csv(in)); }

Dataset ingest_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    return ingest(in);
}

}  // namespace mess
