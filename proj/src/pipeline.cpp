#include "mess/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>

#include "mess/edge.hpp"
#include "mess/evalkit.hpp"
#include "mess/parallel.hpp"

namespace mess {

namespace {

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::ofstream open_output(const std::string& path, const RunConfig& config) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << "# mess config_digest=" << config.digest() << " seed=" << config.seed << "\n";
    return out;
}

std::string gene_id_for(std::size_t index, std::size_t total) {
    std::string id = std::to_string(index + 1);
    std::string width = std::to_string(total);
    return "g" + std::string(width.size() - std::min(width.size(), id.size()), '0') + id;
}

}  // namespace

GenePair to_gene_pair(const SimulatedGene& gene, const std::string& gene_id,
                      const std::string& label1, const std::string& label2) {
    std::vector<double> all_times;
    for (const auto* group : {&gene.group1, &gene.group2})
        for (const auto& ind : *group)
            for (const auto& obs : ind.observations) all_times.push_back(obs.time);
    TimeGrid grid = TimeGrid::build(all_times);

    GenePair pair;
    pair.gene = gene_id;
    const std::vector<SimIndividual>* groups[2] = {&gene.group1, &gene.group2};
    LongitudinalSample* samples[2] = {&pair.group1, &pair.group2};
    const std::string labels[2] = {label1, label2};
    for (int g = 0; g < 2; ++g) {
        samples[g]->gene = gene_id;
        samples[g]->group = labels[g];
        samples[g]->grid = grid;
        for (std::size_t i = 0; i < groups[g]->size(); ++i) {
            const auto& sim_ind = (*groups[g])[i];
            std::vector<double> times;
            Eigen::VectorXd y(static_cast<Eigen::Index>(sim_ind.observations.size()));
            for (std::size_t j = 0; j < sim_ind.observations.size(); ++j) {
                times.push_back(sim_ind.observations[j].time);
                y[static_cast<Eigen::Index>(j)] = sim_ind.observations[j].value;
            }
            samples[g]->individuals.push_back(
                {labels[g] + "_" + std::to_string(i + 1), IncidenceMatrix::build(times, grid),
                 std::move(y)});
        }
    }
    return pair;
}

void run_simulate(const RunConfig& config, const std::string& data_csv,
                  const std::string& truth_csv) {
    config.validate();
    SimulatedDataset dataset = simulate_dataset(config.sim, config.seed, config.threads);

    std::ofstream data = open_output(data_csv, config);
    data << "gene,group,individual,time,value\n";
    std::ofstream truth = open_output(truth_csv, config);
    truth << "gene,is_de,true_distance\n";

    for (std::size_t g = 0; g < dataset.genes.size(); ++g) {
        const SimulatedGene& gene = dataset.genes[g];
        const std::string id = gene_id_for(g, dataset.genes.size());
        const std::vector<SimIndividual>* groups[2] = {&gene.group1, &gene.group2};
        const char* labels[2] = {"treated", "control"};
        for (int k = 0; k < 2; ++k) {
            for (std::size_t i = 0; i < groups[k]->size(); ++i) {
                for (const auto& obs : (*groups[k])[i].observations)
                    data << id << ',' << labels[k] << ',' << labels[k] << '_' << (i + 1) << ','
                         << fmt(obs.time) << ',' << fmt(obs.value) << '\n';
            }
        }
        truth << id << ',' << (gene.params.de ? 1 : 0) << ',' << fmt(gene.true_distance) << '\n';
    }
    if (!data || !truth) throw std::runtime_error("failed writing simulation outputs");
}

void run_fit(const RunConfig& config, const std::string& input_csv,
             const std::string& curves_csv, const std::string& diagnostics_csv) {
    config.validate();
    Dataset dataset = ingest_file(input_csv);

    struct FitRow {
        std::optional<std::pair<GroupFit, GroupFit>> fits;
        std::string error;
    };
    std::vector<FitRow> rows(dataset.genes.size());
    parallel_for(dataset.genes.size(), config.threads, [&](std::size_t g) {
        try {
            rows[g].fits = fit_gene(dataset.genes[g], config.fit);
        } catch (const std::exception& e) {
            rows[g].error = e.what();
        }
    });

    std::ofstream curves = open_output(curves_csv, config);
    curves << "gene,group,kind,individual,t,value\n";
    std::ofstream diag = open_output(diagnostics_csv, config);
    diag << "gene,stage,reason\n";

    for (const auto& skip : dataset.skipped) diag << skip.gene << ",ingest," << skip.reason << '\n';

    for (std::size_t g = 0; g < dataset.genes.size(); ++g) {
        const GenePair& gene = dataset.genes[g];
        if (!rows[g].fits) {
            diag << gene.gene << ",fit," << rows[g].error << '\n';
            continue;
        }
        const GroupFit* fits[2] = {&rows[g].fits->first, &rows[g].fits->second};
        const LongitudinalSample* samples[2] = {&gene.group1, &gene.group2};
        for (int k = 0; k < 2; ++k) {
            const TimeGrid& grid = samples[k]->grid;
            const int S = config.curve_samples;
            for (int s = 0; s < S; ++s) {
                double t = grid.front() + grid.range() * static_cast<double>(s) / (S - 1);
                curves << gene.gene << ',' << samples[k]->group << ",mean,," << fmt(t) << ','
                       << fmt(fits[k]->eta(t)) << '\n';
            }
            for (std::size_t i = 0; i < samples[k]->individuals.size(); ++i) {
                const auto& id = samples[k]->individuals[i].id;
                for (int s = 0; s < S; ++s) {
                    double t = grid.front() + grid.range() * static_cast<double>(s) / (S - 1);
                    curves << gene.gene << ',' << samples[k]->group << ",individual," << id << ','
                           << fmt(t) << ',' << fmt(fits[k]->eta(t) + fits[k]->deviations[i](t))
                           << '\n';
                }
            }
        }
    }
    if (!curves || !diag) throw std::runtime_error("failed writing fit outputs");
}

std::vector<GeneTestResult> test_dataset(const std::vector<GenePair>& genes,
                                         const RunConfig& config,
                                         std::vector<SkipEntry>& failures) {
    struct Observed {
        bool ok = false;
        double statistic = 0.0;
        std::pair<SmoothingPair, SmoothingPair> smoothing;
        std::string error;
    };
    std::vector<Observed> observed(genes.size());
    parallel_for(genes.size(), config.threads, [&](std::size_t g) {
        try {
            auto fits = fit_gene(genes[g], config.fit);
            observed[g].statistic = l2_statistic(fits.first, fits.second);
            observed[g].smoothing = {fits.first.smoothing, fits.second.smoothing};
            observed[g].ok = true;
        } catch (const std::exception& e) {
            observed[g].error = e.what();
        }
    });

    std::vector<GenePair> fitted;
    std::vector<std::pair<SmoothingPair, SmoothingPair>> smoothing;
    std::vector<double> statistics;
    std::vector<std::string> ids;
    for (std::size_t g = 0; g < genes.size(); ++g) {
        if (!observed[g].ok) {
            failures.push_back({genes[g].gene, observed[g].error});
            continue;
        }
        fitted.push_back(genes[g]);
        smoothing.push_back(observed[g].smoothing);
        statistics.push_back(observed[g].statistic);
        ids.push_back(genes[g].gene);
    }
    if (fitted.empty()) return {};

    NullPool pool =
        bootstrap_null(fitted, smoothing, config.bootstrap, config.seed, config.fit,
                       config.threads);

    std::vector<GeneTestResult> results(fitted.size());
    std::vector<double> pvalues(fitted.size());
    for (std::size_t g = 0; g < fitted.size(); ++g) {
        results[g].gene = ids[g];
        results[g].statistic = statistics[g];
        results[g].p = empirical_pvalue(statistics[g], pool);
        pvalues[g] = results[g].p;
    }
    std::vector<double> qvalues = bh_adjust(pvalues);
    for (std::size_t g = 0; g < fitted.size(); ++g) results[g].q = qvalues[g];
    return rank_genes(std::move(results));
}

void run_test(const RunConfig& config, const std::string& input_csv,
              const std::string& results_csv, const std::string& diagnostics_csv) {
    config.validate();
    Dataset dataset = ingest_file(input_csv);

    std::vector<SkipEntry> failures;
    std::vector<GeneTestResult> results = test_dataset(dataset.genes, config, failures);

    std::ofstream out = open_output(results_csv, config);
    out << "gene,statistic,p,q,rank,significant\n";
    for (const auto& r : results)
        out << r.gene << ',' << fmt(r.statistic) << ',' << fmt(r.p) << ',' << fmt(r.q) << ','
            << r.rank << ',' << (r.q < config.fdr ? 1 : 0) << '\n';

    std::ofstream diag = open_output(diagnostics_csv, config);
    diag << "gene,stage,reason\n";
    for (const auto& skip : dataset.skipped) diag << skip.gene << ",ingest," << skip.reason << '\n';
    for (const auto& f : failures) diag << f.gene << ",fit," << f.reason << '\n';
    if (!out || !diag) throw std::runtime_error("failed writing test outputs");
}

BenchmarkResult run_benchmark(const RunConfig& config, const std::string& report_csv,
                              const std::string& roc_csv) {
    config.validate();
    SimulatedDataset dataset = simulate_dataset(config.sim, config.seed, config.threads);

    struct Scored {
        bool ok = false;
        double mess = 0.0;
        double edge = 0.0;
        bool de = false;
    };
    std::vector<Scored> scored(dataset.genes.size());
    parallel_for(dataset.genes.size(), config.threads, [&](std::size_t g) {
        try {
            GenePair pair =
                to_gene_pair(dataset.genes[g], gene_id_for(g, dataset.genes.size()));
            auto fits = fit_gene(pair, config.fit);
            scored[g].mess = l2_statistic(fits.first, fits.second);
            scored[g].edge = f_statistic(fit_edge(pair, config.edge_basis_dim));
            scored[g].de = dataset.genes[g].params.de;
            scored[g].ok = true;
        } catch (const std::exception&) {
            // counted below
        }
    });

    std::vector<double> mess_scores, edge_scores;
    std::vector<bool> labels;
    BenchmarkResult result;
    for (const auto& s : scored) {
        if (!s.ok) {
            ++result.genes_failed;
            continue;
        }
        mess_scores.push_back(s.mess);
        edge_scores.push_back(s.edge);
        labels.push_back(s.de);
    }
    result.genes_scored = labels.size();

    RocCurve mess_roc = roc_curve(mess_scores, labels);
    RocCurve edge_roc = roc_curve(edge_scores, labels);
    result.mess_auc = auc(mess_roc);
    result.edge_auc = auc(edge_roc);
    result.mess_power90 = power_at_specificity(mess_roc, 0.9);
    result.edge_power90 = power_at_specificity(edge_roc, 0.9);

    std::ofstream report = open_output(report_csv, config);
    report << "method,metric,value\n";
    report << "mess,auc," << fmt(result.mess_auc) << '\n';
    report << "mess,power_at_90_specificity," << fmt(result.mess_power90) << '\n';
    report << "mess,genes_scored," << result.genes_scored << '\n';
    report << "edge,auc," << fmt(result.edge_auc) << '\n';
    report << "edge,power_at_90_specificity," << fmt(result.edge_power90) << '\n';
    report << "edge,genes_scored," << result.genes_scored << '\n';

    std::ofstream roc = open_output(roc_csv, config);
    roc << "method,fpr,tpr\n";
    for (const auto& [fpr, tpr] : mess_roc.points) roc << "mess," << fmt(fpr) << ',' << fmt(tpr) << '\n';
    for (const auto& [fpr, tpr] : edge_roc.points) roc << "edge," << fmt(fpr) << ',' << fmt(tpr) << '\n';
    if (!report || !roc) throw std::runtime_error("failed writing benchmark outputs");
    return result;
}

}  // namespace mess
