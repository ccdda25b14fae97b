#ifndef MESS_PIPELINE_HPP
#define MESS_PIPELINE_HPP

#include <string>
#include <vector>

#include "mess/dataset.hpp"
#include "mess/diffexpr.hpp"
#include "mess/runconfig.hpp"
#include "mess/simulate.hpp"

namespace mess {

// SimulatedGene -> fit-ready gene pair (grid from the union of observed times)
GenePair to_gene_pair(const SimulatedGene& gene, const std::string& gene_id,
                      const std::string& label1 = "treated", const std::string& label2 = "control");

// simulate -> data CSV + truth CSV (gene,is_de,true_distance)
void run_simulate(const RunConfig& config, const std::string& data_csv,
                  const std::string& truth_csv);

// per-gene fits; mean and individual curves sampled at curve_samples uniform
// times into curves_csv, failures and quarantined genes into diagnostics_csv
void run_fit(const RunConfig& config, const std::string& input_csv,
             const std::string& curves_csv, const std::string& diagnostics_csv);

// full differential-expression pipeline -> gene,statistic,p,q,rank,significant
void run_test(const RunConfig& config, const std::string& input_csv,
              const std::string& results_csv, const std::string& diagnostics_csv);

struct BenchmarkResult {
    double mess_auc = 0.0;
    double mess_power90 = 0.0;
    double edge_auc = 0.0;
    double edge_power90 = 0.0;
    std::size_t genes_scored = 0;
    std::size_t genes_failed = 0;
};

// simulate, score every gene with the MESS statistic and the EDGE F statistic,
// then summarize ROC/AUC/power against the simulation truth
BenchmarkResult run_benchmark(const RunConfig& config, const std::string& report_csv,
                              const std::string& roc_csv);

// in-memory test pipeline; used by run_test and by the acceptance suite
std::vector<GeneTestResult> test_dataset(const std::vector<GenePair>& genes,
                                         const RunConfig& config,
                                         std::vector<SkipEntry>& failures);

}  // namespace mess

#endif
