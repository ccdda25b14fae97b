#include "mess/diffexpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mess/parallel.hpp"
#include "mess/rng.hpp"

namespace mess {

double l2_statistic(const GroupFit& fit_a, const GroupFit& fit_b) {
    return l2_distance(fit_a.eta, fit_b.eta);
}

namespace {

LongitudinalSample pseudo_group(const std::vector<const IndividualData*>& pool,
                                const std::vector<std::size_t>& order,
                                const LongitudinalSample& proto, std::size_t offset,
                                std::size_t size) {
    LongitudinalSample out;
    out.gene = proto.gene;
    out.group = proto.group;
    out.grid = proto.grid;
    out.individuals.reserve(size);
    for (std::size_t i = 0; i < size; ++i) out.individuals.push_back(*pool[order[offset + i]]);
    return out;
}

}  // namespace

NullPool bootstrap_null(const std::vector<GenePair>& genes,
                        const std::vector<std::pair<SmoothingPair, SmoothingPair>>& observed_smoothing,
                        int replicates, std::uint64_t seed, const FitConfig& config,
                        int threads) {
    if (replicates < 1) throw std::invalid_argument("bootstrap replicates must be >= 1");
    if (observed_smoothing.size() != genes.size())
        throw std::invalid_argument("smoothing list does not match dataset");

    const std::size_t B = static_cast<std::size_t>(replicates);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> slots(genes.size() * B, nan);
    Rng master(seed);

    parallel_for(genes.size(), threads, [&](std::size_t g) {
        const GenePair& gene = genes[g];
        std::vector<const IndividualData*> pool;
        pool.reserve(gene.group1.individuals.size() + gene.group2.individuals.size());
        for (const auto& ind : gene.group1.individuals) pool.push_back(&ind);
        for (const auto& ind : gene.group2.individuals) pool.push_back(&ind);

        for (std::size_t b = 0; b < B; ++b) {
            Rng rng = master.derive(g, b);
            try {
                // random disjoint re-partition of the pooled individuals into
                // the original group sizes: under the null of identical mean
                // curves the individuals are exchangeable, so the re-split
                // statistic is drawn from the statistic's own null. Sampling
                // with replacement instead both inflates pseudo-group variance
                // (duplicates) and correlates the two pseudo-groups (shared
                // individuals), which biases the null downward.
                std::vector<std::size_t> order(pool.size());
                std::iota(order.begin(), order.end(), 0);
                for (std::size_t i = pool.size(); i > 1; --i) {
                    std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
                    std::swap(order[i - 1], order[j]);
                }
                const std::size_t n1 = gene.group1.individuals.size();
                LongitudinalSample pseudo1 = pseudo_group(pool, order, gene.group1, 0, n1);
                LongitudinalSample pseudo2 = pseudo_group(pool, order, gene.group2, n1,
                                                          gene.group2.individuals.size());
                GroupFit f1 = em_fit(pseudo1, observed_smoothing[g].first, config);
                GroupFit f2 = em_fit(pseudo2, observed_smoothing[g].second, config);
                slots[g * B + b] = l2_statistic(f1, f2);
            } catch (const std::exception&) {
                // leave the slot NaN; counted below
            }
        }
    });

    NullPool pool;
    pool.genes = genes.size();
    pool.replicates = B;
    pool.values.reserve(slots.size());
    for (double v : slots) {
        if (std::isnan(v))
            ++pool.failures;
        else
            pool.values.push_back(v);
    }
    std::sort(pool.values.begin(), pool.values.end());
    return pool;
}

double empirical_pvalue(double observed, const NullPool& pool) {
    if (pool.values.empty()) throw std::invalid_argument("no null distribution");
    auto it = std::lower_bound(pool.values.begin(), pool.values.end(), observed);
    const std::size_t count_ge = static_cast<std::size_t>(pool.values.end() - it);
    return static_cast<double>(1 + count_ge) / static_cast<double>(1 + pool.values.size());
}

std::vector<double> bh_adjust(const std::vector<double>& pvalues) {
    const std::size_t n = pvalues.size();
    for (double p : pvalues) {
        if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("invalid p-value");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&pvalues](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });

    std::vector<double> q(n);
    double running = 1.0;
    for (std::size_t i = n; i-- > 0;) {
        double value = pvalues[order[i]] * static_cast<double>(n) / static_cast<double>(i + 1);
        running = std::min(running, value);
        q[order[i]] = running;
    }
    return q;
}

std::vector<GeneTestResult> rank_genes(std::vector<GeneTestResult> results) {
    std::sort(results.begin(), results.end(), [](const GeneTestResult& a, const GeneTestResult& b) {
        if (a.p != b.p) return a.p < b.p;
        if (a.statistic != b.statistic) return a.statistic > b.statistic;
        return a.gene < b.gene;
    });
    for (std::size_t i = 0; i < results.size(); ++i) results[i].rank = i + 1;
    return results;
}

}  // namespace mess
