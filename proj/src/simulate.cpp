#include "mess/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "mess/parallel.hpp"

namespace mess {

Eigen::MatrixXd ar1_covariance(double tau, double rho, int p) {
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
    if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("rho must be in [0,1]");
    if (p < 1) throw std::invalid_argument("dimension must be >= 1");
    Eigen::MatrixXd D(p, p);
    for (int r = 0; r < p; ++r)
        for (int s = 0; s < p; ++s) D(r, s) = tau * std::pow(rho, std::abs(r - s));
    return D;
}

Eigen::VectorXd sample_ar1_mvn(Rng& rng, double tau, double rho, int p) {
    if (rho >= 1.0) {
        // rank-1 case: one scalar draw broadcast to every coefficient
        return Eigen::VectorXd::Constant(p, std::sqrt(tau) * rng.normal());
    }
    Eigen::LLT<Eigen::MatrixXd> llt(ar1_covariance(tau, rho, p));
    if (llt.info() != Eigen::Success) throw std::runtime_error("covariance not positive definite");
    return rng.mvn(llt.matrixL());
}

BsplineBasis truth_basis(const SimConfig& config) {
    if (config.times.size() < 2) throw std::invalid_argument("need at least two design times");
    const double lo = config.times.front();
    const double hi = config.times.back();
    return BsplineBasis(lo, hi, {0.5 * (lo + hi)}, 3);
}

// error standard deviation sigma_j, lognormal: log sigma ~ N(-2, 0.35)
double draw_sigma(Rng& rng) { return std::exp(-2.0 + std::sqrt(0.35) * rng.normal()); }

namespace {

// integral over the design range of the squared B-spline curve with the given
// coefficients (composite Simpson; the integrand is piecewise polynomial)
double integrated_square(const BsplineBasis& basis, const Eigen::VectorXd& coef) {
    constexpr int kIntervals = 1 << 10;
    const double lo = basis.lo();
    const double hi = basis.hi();
    const double step = (hi - lo) / kIntervals;
    auto sq = [&](double t) {
        double v = basis.evaluate(t).dot(coef);
        return v * v;
    };
    double sum = sq(lo) + sq(hi);
    for (int i = 1; i < kIntervals; ++i) sum += (i % 2 ? 4.0 : 2.0) * sq(lo + step * i);
    return sum * step / 3.0;
}

std::vector<SimIndividual> generate_group(Rng& rng, const SimConfig& config,
                                          const Eigen::MatrixXd& X,
                                          const Eigen::VectorXd& beta, double tau_b,
                                          double sigma, std::size_t group_size) {
    const int dim = static_cast<int>(X.cols());
    const double noise_sd = sigma;  // sigma is the error standard deviation
    std::vector<SimIndividual> group;
    group.reserve(group_size);
    for (std::size_t i = 0; i < group_size; ++i) {
        Eigen::VectorXd b = sample_ar1_mvn(rng, tau_b, 0.6, dim);
        Eigen::VectorXd mean = X * (beta + b);
        SimIndividual ind;
        ind.observations.reserve(config.times.size());
        for (std::size_t j = 0; j < config.times.size(); ++j) {
            double value = mean[static_cast<Eigen::Index>(j)] + noise_sd * rng.normal();
            bool keep = true;
            if (config.dropout_probability > 0.0)
                keep = rng.uniform01() >= config.dropout_probability;
            if (keep) ind.observations.push_back({config.times[j], value});
        }
        group.push_back(std::move(ind));
    }
    return group;
}

}  // namespace

SimulatedGene simulate_gene(Rng& rng, const SimConfig& config, const BsplineBasis& basis) {
    if (config.times.size() < 3) throw std::invalid_argument("need at least three design times");
    const int dim = static_cast<int>(basis.size());
    const Eigen::MatrixXd X = basis.evaluate_at(config.times);

    SimulatedGene gene;
    SimGeneParams& p = gene.params;
    p.effect_scale = config.effect_scale;

    p.beta1 = sample_ar1_mvn(rng, 0.25, 0.6, dim);
    p.tau_b1 = rng.uniform(0.1, 0.2);
    p.sigma1 = draw_sigma(rng);
    p.de = rng.uniform01() < config.de_probability;

    if (p.de) {
        Eigen::VectorXd delta = sample_ar1_mvn(rng, 0.25, 0.9, dim);
        delta[0] = 0.0;  // both mean curves start the time course together
        double norm = delta.norm();
        if (norm == 0.0) delta[1] = 1.0;  // measure-zero draw; keep the unit-norm contract
        else delta /= norm;
        p.beta_delta = delta;
        p.beta2 = p.beta1 + config.effect_scale * delta;
        p.tau_b2 = rng.uniform(0.1, 0.2);
        p.sigma2 = draw_sigma(rng);
        gene.true_distance = config.effect_scale * config.effect_scale *
                             integrated_square(basis, delta);
    } else {
        p.beta2 = p.beta1;
        p.tau_b2 = p.tau_b1;
        p.sigma2 = p.sigma1;
        gene.true_distance = 0.0;
    }

    gene.group1 = generate_group(rng, config, X, p.beta1, p.tau_b1, p.sigma1, config.group1_size);
    gene.group2 = generate_group(rng, config, X, p.beta2, p.tau_b2, p.sigma2, config.group2_size);
    return gene;
}

SimulatedDataset simulate_dataset(const SimConfig& config, std::uint64_t seed, int threads) {
    if (config.genes < 1) throw std::invalid_argument("gene count must be >= 1");
    const BsplineBasis basis = truth_basis(config);
    SimulatedDataset dataset;
    dataset.genes.resize(config.genes);
    Rng master(seed);
    parallel_for(config.genes, threads, [&](std::size_t g) {
        Rng rng = master.derive(g);
        dataset.genes[g] = simulate_gene(rng, config, basis);
    });
    return dataset;
}

}  // namespace mess
