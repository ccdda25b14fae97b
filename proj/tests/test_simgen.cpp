#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "helpers.hpp"
#include "mess/pipeline.hpp"
#include "mess/simulate.hpp"

using namespace mess;

TEST_CASE("AR(1) covariance worked examples") {
    Eigen::MatrixXd I5 = ar1_covariance(1.0, 0.0, 5);
    CHECK((I5 - Eigen::MatrixXd::Identity(5, 5)).norm() == 0.0);

    Eigen::MatrixXd D = ar1_covariance(0.25, 0.6, 5);
    CHECK(D(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(D(1, 3) == doctest::Approx(0.25 * 0.36).epsilon(1e-15));
    CHECK(D(0, 4) == doctest::Approx(0.25 * std::pow(0.6, 4)).epsilon(1e-15));
    CHECK((D - D.transpose()).norm() == 0.0);

    // rho = 1 degenerates to a rank-one constant matrix
    Eigen::MatrixXd ones = ar1_covariance(0.3, 1.0, 4);
    CHECK((ones - 0.3 * Eigen::MatrixXd::Ones(4, 4)).norm() < 1e-15);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ones);
    CHECK(svd.singularValues()[1] < 1e-12);

    CHECK_THROWS_AS(ar1_covariance(-1.0, 0.5, 3), std::invalid_argument);
    CHECK_THROWS_AS(ar1_covariance(1.0, 1.5, 3), std::invalid_argument);
    CHECK_THROWS_AS(ar1_covariance(1.0, 0.5, 0), std::invalid_argument);
}

TEST_CASE("AR(1) covariance admits a Cholesky factor for rho below one") {
    Rng rng(700);
    for (int rep = 0; rep < 50; ++rep) {
        double tau = rng.uniform(0.01, 3.0);
        double rho = rng.uniform(0.0, 1.0 - 1e-9);
        int p = 2 + static_cast<int>(rng.next_u64() % 7);
        Eigen::MatrixXd D = ar1_covariance(tau, rho, p);
        CHECK(Eigen::LLT<Eigen::MatrixXd>(D).info() == Eigen::Success);
    }
}

TEST_CASE("rho equal to one draws a broadcast scalar shift") {
    Rng rng(701);
    Eigen::VectorXd b = sample_ar1_mvn(rng, 0.16, 1.0, 5);
    for (int r = 1; r < 5; ++r) CHECK(b[r] == b[0]);
    // variance of the shared shift matches tau over many draws
    double ss = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd x = sample_ar1_mvn(rng, 0.16, 1.0, 5);
        ss += x[0] * x[0];
    }
    CHECK(ss / n == doctest::Approx(0.16).epsilon(0.05));
}

TEST_CASE("truth basis is cubic with one interior knot") {
    SimConfig config;
    BsplineBasis basis = truth_basis(config);
    CHECK(basis.size() == 5);
    CHECK(basis.degree() == 3);
    CHECK(basis.lo() == 0.0);
    CHECK(basis.hi() == 24.0);

    // clamped: at the left end only the first basis function is active
    Eigen::VectorXd left = basis.evaluate(0.0);
    CHECK(left[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(left.tail(4).cwiseAbs().maxCoeff() < 1e-15);
    Eigen::VectorXd right = basis.evaluate(24.0);
    CHECK(right[4] == doctest::Approx(1.0).epsilon(1e-15));

    // partition of unity across the range
    for (double t = 0.0; t <= 24.0; t += 0.37) {
        Eigen::VectorXd v = basis.evaluate(t);
        CHECK(v.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(v.minCoeff() >= 0.0);
    }
}

TEST_CASE("simulated genes satisfy the construction invariants") {
    SimConfig config;
    BsplineBasis basis = truth_basis(config);
    Rng master(702);
    int de_seen = 0;
    for (int g = 0; g < 200; ++g) {
        Rng rng = master.derive(static_cast<std::uint64_t>(g));
        SimulatedGene gene = simulate_gene(rng, config, basis);
        CHECK(gene.group1.size() == 9);
        CHECK(gene.group2.size() == 9);
        for (const auto& ind : gene.group1) CHECK(ind.observations.size() == 5);

        if (gene.params.de) {
            ++de_seen;
            // mean curves coincide at t=0: the first delta coefficient is
            // pinned to zero and the basis is clamped
            double mu1 = gene.params.beta1.dot(basis.evaluate(0.0));
            double mu2 = gene.params.beta2.dot(basis.evaluate(0.0));
            CHECK(mu1 == mu2);
            CHECK(gene.params.beta_delta[0] == 0.0);
            CHECK(gene.params.beta_delta.norm() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(gene.true_distance > 0.0);
        } else {
            CHECK((gene.params.beta1 - gene.params.beta2).norm() == 0.0);
            CHECK(gene.true_distance == 0.0);
        }
        CHECK(gene.params.tau_b1 >= 0.1);
        CHECK(gene.params.tau_b1 <= 0.2);
        CHECK(gene.params.sigma1 > 0.0);
    }
    CHECK(de_seen > 8);   // ~10% of 200
    CHECK(de_seen < 40);
}

TEST_CASE("true distance equals the quadrature of the squared mean difference") {
    SimConfig config;
    config.effect_scale = 1.7;
    BsplineBasis basis = truth_basis(config);
    Rng master(703);
    for (int g = 0; g < 50; ++g) {
        Rng rng = master.derive(static_cast<std::uint64_t>(g));
        SimulatedGene gene = simulate_gene(rng, config, basis);
        if (!gene.params.de) continue;
        // Simpson quadrature of (mu1 - mu2)^2 straight from the coefficients
        const int n = 2000;
        const double h = 24.0 / n;
        double acc = 0.0;
        for (int i = 0; i <= n; ++i) {
            double t = h * i;
            double d = (gene.params.beta1 - gene.params.beta2).dot(basis.evaluate(t));
            double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += w * d * d;
        }
        acc *= h / 3.0;
        CHECK(gene.true_distance == doctest::Approx(acc).epsilon(1e-8));
        // the effect scale enters squared
        CHECK(gene.true_distance ==
              doctest::Approx(1.7 * 1.7 *
                              [&] {
                                  double a = 0.0;
                                  for (int i = 0; i <= n; ++i) {
                                      double t = h * i;
                                      double d = gene.params.beta_delta.dot(basis.evaluate(t));
                                      double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
                                      a += w * d * d;
                                  }
                                  return a * h / 3.0;
                              }())
                  .epsilon(1e-8));
    }
}

TEST_CASE("noise variance draws are lognormal with the pinned parameters") {
    Rng rng(704);
    const int n = 100000;
    double sum_log = 0.0, sumsq_log = 0.0;
    for (int i = 0; i < n; ++i) {
        double s2 = draw_sigma(rng);
        CHECK(s2 > 0.0);
        double l = std::log(s2);
        sum_log += l;
        sumsq_log += l * l;
    }
    double mean = sum_log / n;
    double var = sumsq_log / n - mean * mean;
    // mean of log is -2 (3 sigma band), variance of log is 0.35
    CHECK(std::abs(mean + 2.0) < 3.0 * std::sqrt(0.35 / n));
    CHECK(var == doctest::Approx(0.35).epsilon(0.02));
}

TEST_CASE("individual deviations have the declared covariance") {
    Rng rng(705);
    const double tau = 0.15;
    const int n = 100000;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(5, 5);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd b = sample_ar1_mvn(rng, tau, 0.6, 5);
        acc += b * b.transpose();
    }
    acc /= n;
    Eigen::MatrixXd target = ar1_covariance(tau, 0.6, 5);
    CHECK((acc - target).norm() / target.norm() < 0.02);
}

TEST_CASE("dataset simulation is deterministic and thread-count invariant") {
    SimConfig config;
    config.genes = 40;
    SimulatedDataset a = simulate_dataset(config, 99, 1);
    SimulatedDataset b = simulate_dataset(config, 99, 4);
    REQUIRE(a.genes.size() == 40);
    REQUIRE(b.genes.size() == 40);
    for (std::size_t g = 0; g < 40; ++g) {
        CHECK(a.genes[g].params.de == b.genes[g].params.de);
        CHECK((a.genes[g].params.beta1 - b.genes[g].params.beta1).norm() == 0.0);
        for (std::size_t i = 0; i < 9; ++i)
            for (std::size_t j = 0; j < 5; ++j)
                CHECK(a.genes[g].group1[i].observations[j].value ==
                      b.genes[g].group1[i].observations[j].value);
    }

    SimulatedDataset c = simulate_dataset(config, 100, 1);
    CHECK(a.genes[0].group1[0].observations[0].value !=
          c.genes[0].group1[0].observations[0].value);
}

TEST_CASE("simulated genes convert to fit-ready pairs") {
    SimConfig config;
    BsplineBasis basis = truth_basis(config);
    Rng rng(706);
    SimulatedGene gene = simulate_gene(rng, config, basis);
    GenePair pair = to_gene_pair(gene, "g7");
    CHECK(pair.gene == "g7");
    CHECK(pair.group1.individuals.size() == 9);
    CHECK(pair.group2.individuals.size() == 9);
    CHECK(pair.group1.grid.size() == 5);
    CHECK(pair.group1.grid.point(0) == 0.0);
    CHECK(pair.group1.grid.point(4) == 24.0);
    pair.group1.validate();
    pair.group2.validate();
}
