#ifndef MESS_DIFFEXPR_HPP
#define MESS_DIFFEXPR_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mess/fit.hpp"

namespace mess {

// Null statistic values pooled across genes and bootstrap replicates.
struct NullPool {
    std::vector<double> values;  // sorted ascending
    std::size_t genes = 0;
    std::size_t replicates = 0;
    std::size_t failures = 0;  // per-replicate fit failures, counted not dropped
};

struct GeneTestResult {
    std::string gene;
    double statistic = 0.0;
    double p = 1.0;
    double q = 1.0;
    std::size_t rank = 0;
};

// L2 distance between the two fitted group mean curves.
double l2_statistic(const GroupFit& fit_a, const GroupFit& fit_b);

// Pooled nonparametric bootstrap null: per gene and replicate, the n1+n2
// individuals of both groups are pooled and pseudo-groups of the original
// sizes are drawn with replacement, then both groups are refitted with the
// smoothing parameters frozen at the observed per-group estimates.
NullPool bootstrap_null(const std::vector<GenePair>& genes,
                        const std::vector<std::pair<SmoothingPair, SmoothingPair>>& observed_smoothing,
                        int replicates, std::uint64_t seed, const FitConfig& config,
                        int threads = 0);

// p = (1 + #{D* >= observed}) / (1 + |pool|)
double empirical_pvalue(double observed, const NullPool& pool);

// Benjamini-Hochberg step-up q-values, mapped back to input order.
std::vector<double> bh_adjust(const std::vector<double>& pvalues);

// Sort by ascending p, ties by descending statistic then gene id; assign ranks.
std::vector<GeneTestResult> rank_genes(std::vector<GeneTestResult> results);

}  // namespace mess

#endif
