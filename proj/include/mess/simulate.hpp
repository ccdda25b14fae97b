#ifndef MESS_SIMULATE_HPP
#define MESS_SIMULATE_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mess/bspline.hpp"
#include "mess/rng.hpp"

namespace mess {

// AR(1)-structured covariance D(tau, rho) with entries tau * rho^|r-s|.
Eigen::MatrixXd ar1_covariance(double tau, double rho, int p);

// sample from MVN(0, D(tau, rho)); rho == 1 degenerates to a scalar shift
Eigen::VectorXd sample_ar1_mvn(Rng& rng, double tau, double rho, int p);

// lognormal noise standard-deviation draw: exp(N(-2, 0.35))
double draw_sigma(Rng& rng);

struct SimConfig {
    std::size_t genes = 1000;
    std::size_t group1_size = 9;
    std::size_t group2_size = 9;
    std::vector<double> times = {0.0, 2.0, 6.0, 12.0, 24.0};
    double effect_scale = 1.0;
    double de_probability = 0.1;
    double dropout_probability = 0.0;  // per-observation missingness, off by default
};

struct SimGeneParams {
    Eigen::VectorXd beta1;
    Eigen::VectorXd beta2;
    Eigen::VectorXd beta_delta;  // unit L2 norm, first coefficient zero; empty if not DE
    double tau_b1 = 0.0;
    double tau_b2 = 0.0;
    double sigma1 = 0.0;  // error standard deviations
    double sigma2 = 0.0;
    bool de = false;
    double effect_scale = 1.0;
};

struct SimObservation {
    double time;
    double value;
};

struct SimIndividual {
    std::vector<SimObservation> observations;
};

struct SimulatedGene {
    SimGeneParams params;
    std::vector<SimIndividual> group1;
    std::vector<SimIndividual> group2;
    double true_distance = 0.0;  // integral of squared mean-curve difference
};

// One gene per the generation protocol; rng must be the gene's own stream.
SimulatedGene simulate_gene(Rng& rng, const SimConfig& config, const BsplineBasis& basis);

// Default truth basis: cubic, clamped at the time range ends, single interior
// knot at the midpoint (dimension 5 for the default design).
BsplineBasis truth_basis(const SimConfig& config);

struct SimulatedDataset {
    std::vector<SimulatedGene> genes;
};

SimulatedDataset simulate_dataset(const SimConfig& config, std::uint64_t seed, int threads = 0);

}  // namespace mess

#endif
