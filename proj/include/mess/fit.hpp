#ifndef MESS_FIT_HPP
#define MESS_FIT_HPP

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mess/spline.hpp"

namespace mess {

// One gene x one group: per-individual observations on a shared grid.
struct IndividualData {
    std::string id;
    IncidenceMatrix incidence;
    Eigen::VectorXd y;
};

struct LongitudinalSample {
    std::string gene;
    std::string group;
    TimeGrid grid;
    std::vector<IndividualData> individuals;

    std::size_t total_observations() const;
    // throws if any structural invariant fails
    void validate() const;
};

struct VarianceComponents {
    Eigen::MatrixXd D;  // covariance of individual deviations at the grid
    double sigma2 = 1.0;
};

// Smoothing penalties for the mean curve (lambda) and the shared
// individual-curve penalty (lambda_v).
struct SmoothingPair {
    double lambda = 0.0;
    double lambda_v = 0.0;
};

struct FitConfig {
    int max_em_iterations = 200;
    double em_rel_tol = 1e-6;
    // Nelder-Mead search box in log10(lambda) space
    double log10_lo = -6.0;
    double log10_hi = 6.0;
    double simplex_spread_tol = 1e-4;
    int max_evaluations = 100;
};

struct GroupFit {
    CurveOnGrid eta;                     // fitted mean curve
    std::vector<CurveOnGrid> deviations; // fitted individual curves v_i
    VarianceComponents components;
    SmoothingPair smoothing;
    Eigen::MatrixXd regularized_D;       // D_v = (D^-1 + lambda_v G)^-1
    double penalized_gll = 0.0;          // joint objective at the fitted values
    double em_objective = 0.0;           // marginal criterion tracked by EM
    double aicc = 0.0;
    double effective_df = 0.0;
    int em_iterations = 0;
    bool converged = false;
    bool variance_floored = false;
    std::vector<double> objective_trace; // em_objective per iteration
};

// Twice-negative penalized generalized log-likelihood at explicit values:
// sum_i { |r_i|^2/sigma2 + m_i log sigma2 + log|D| + v_i' D^-1 v_i }
//   + lambda eta'G eta + lambda_v sum_i v_i'G v_i
double penalized_gll(const LongitudinalSample& sample, const CurveOnGrid& eta,
                     const std::vector<CurveOnGrid>& deviations,
                     const VarianceComponents& components, const SmoothingPair& smoothing);

// eta_hat = (sum X'V^-1 X + lambda G)^-1 sum X'V^-1 y
CurveOnGrid estimate_mean(const LongitudinalSample& sample, const VarianceComponents& components,
                          const SmoothingPair& smoothing);

// v_hat_i = D_v X_i' V_i^-1 (y_i - X_i eta)
std::vector<CurveOnGrid> blup_individuals(const LongitudinalSample& sample, const CurveOnGrid& eta,
                                          const VarianceComponents& components,
                                          const SmoothingPair& smoothing);

// EM estimation of the variance components at fixed smoothing.
GroupFit em_fit(const LongitudinalSample& sample, const SmoothingPair& smoothing,
                const FitConfig& config);

// Corrected AIC of a completed fit (recomputed from the stored components).
double aicc_score(const GroupFit& fit, const LongitudinalSample& sample);

// Downhill-simplex search over log10(lambda, lambda_v) minimizing AICc.
GroupFit select_smoothing(const LongitudinalSample& sample, const FitConfig& config);

struct GenePair {
    std::string gene;
    LongitudinalSample group1;
    LongitudinalSample group2;
};

std::pair<GroupFit, GroupFit> fit_gene(const GenePair& gene, const FitConfig& config);

}  // namespace mess

#endif
