#ifndef MESS_TEST_HELPERS_HPP
#define MESS_TEST_HELPERS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mess/fit.hpp"
#include "mess/rng.hpp"

namespace mess::testing {

// random fit-ready sample: n individuals on a given grid, optionally with
// per-individual missingness
inline LongitudinalSample random_sample(Rng& rng, const std::vector<double>& grid_times,
                                        std::size_t n_individuals, double missing_prob = 0.0) {
    LongitudinalSample sample;
    sample.gene = "test";
    sample.group = "g1";
    sample.grid = TimeGrid::build(grid_times);
    const std::size_t m = sample.grid.size();

    // smooth-ish random mean plus individual bumps plus noise
    Eigen::VectorXd mean(m);
    for (std::size_t r = 0; r < m; ++r)
        mean[static_cast<Eigen::Index>(r)] =
            std::sin(0.2 * sample.grid.point(r)) + 0.3 * rng.normal();

    for (std::size_t i = 0; i < n_individuals; ++i) {
        double shift = 0.3 * rng.normal();
        double slope = 0.05 * rng.normal();
        std::vector<double> times;
        std::vector<double> values;
        for (std::size_t r = 0; r < m; ++r) {
            if (missing_prob > 0.0 && rng.uniform01() < missing_prob && times.size() + (m - r) > 2)
                continue;
            times.push_back(sample.grid.point(r));
            values.push_back(mean[static_cast<Eigen::Index>(r)] + shift +
                             slope * sample.grid.point(r) + 0.15 * rng.normal());
        }
        while (times.size() < 2) {  // keep every individual fittable
            times.push_back(sample.grid.point(times.size()));
            values.push_back(mean[static_cast<Eigen::Index>(times.size() - 1)]);
        }
        Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(values.data(),
                                                        static_cast<Eigen::Index>(values.size()));
        sample.individuals.push_back(
            {"ind" + std::to_string(i + 1), IncidenceMatrix::build(times, sample.grid), y});
    }
    return sample;
}

// generic derivative-free Nelder-Mead minimizer for oracle checks
inline Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                   Eigen::VectorXd start, double step = 0.5,
                                   int max_iter = 20000, double tol = 1e-12) {
    const Eigen::Index n = start.size();
    std::vector<std::pair<double, Eigen::VectorXd>> simplex;
    simplex.reserve(static_cast<std::size_t>(n) + 1);
    simplex.emplace_back(f(start), start);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd v = start;
        v[i] += step;
        simplex.emplace_back(f(v), v);
    }
    auto by_value = [](const auto& a, const auto& b) { return a.first < b.first; };
    for (int iter = 0; iter < max_iter; ++iter) {
        std::sort(simplex.begin(), simplex.end(), by_value);
        if (simplex.back().first - simplex.front().first < tol) break;
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i + 1 < simplex.size(); ++i) centroid += simplex[i].second;
        centroid /= static_cast<double>(n);
        auto& worst = simplex.back();
        Eigen::VectorXd xr = centroid + (centroid - worst.second);
        double fr = f(xr);
        if (fr < simplex.front().first) {
            Eigen::VectorXd xe = centroid + 2.0 * (centroid - worst.second);
            double fe = f(xe);
            worst = fe < fr ? std::make_pair(fe, xe) : std::make_pair(fr, xr);
        } else if (fr < simplex[simplex.size() - 2].first) {
            worst = {fr, xr};
        } else {
            Eigen::VectorXd xc = centroid + 0.5 * ((fr < worst.first ? xr : worst.second) - centroid);
            double fc = f(xc);
            if (fc < std::min(fr, worst.first)) {
                worst = {fc, xc};
            } else {
                for (std::size_t i = 1; i < simplex.size(); ++i) {
                    simplex[i].second =
                        simplex.front().second + 0.5 * (simplex[i].second - simplex.front().second);
                    simplex[i].first = f(simplex[i].second);
                }
            }
        }
    }
    std::sort(simplex.begin(), simplex.end(), by_value);
    return simplex.front().second;
}

// two-sided Kolmogorov-Smirnov statistic against U(0,1)
inline double ks_uniform_statistic(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max({d, std::abs(values[i] - lo), std::abs(values[i] - hi)});
    }
    return d;
}

}  // namespace mess::testing

#endif
