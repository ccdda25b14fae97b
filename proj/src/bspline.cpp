#include "mess/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mess {

BsplineBasis::BsplineBasis(double lo, double hi, std::vector<double> interior_knots, int degree)
    : lo_(lo), hi_(hi), degree_(degree) {
    if (!(hi > lo)) throw std::invalid_argument("empty basis support");
    if (degree < 1) throw std::invalid_argument("degree must be >= 1");
    std::sort(interior_knots.begin(), interior_knots.end());
    for (double k : interior_knots) {
        if (!(k > lo) || !(k < hi)) throw std::invalid_argument("interior knot outside range");
    }
    size_ = interior_knots.size() + static_cast<std::size_t>(degree) + 1;
    knots_.reserve(2 * (degree + 1) + interior_knots.size());
    knots_.insert(knots_.end(), static_cast<std::size_t>(degree) + 1, lo);
    knots_.insert(knots_.end(), interior_knots.begin(), interior_knots.end());
    knots_.insert(knots_.end(), static_cast<std::size_t>(degree) + 1, hi);
}

Eigen::VectorXd BsplineBasis::evaluate(double t) const {
    if (t < lo_ || t > hi_) throw std::domain_error("time outside basis support");
    const int p = degree_;
    const std::size_t n = size_;

    // locate the knot span [knots_[span], knots_[span+1])
    std::size_t span;
    if (t >= hi_) {
        span = n - 1;  // right end attaches to the last span
    } else {
        span = static_cast<std::size_t>(
                   std::upper_bound(knots_.begin(), knots_.end(), t) - knots_.begin()) -
               1;
    }

    // Cox-de Boor recursion for the p+1 nonzero functions on this span
    std::vector<double> basis(static_cast<std::size_t>(p) + 1, 0.0);
    std::vector<double> left(static_cast<std::size_t>(p) + 1);
    std::vector<double> right(static_cast<std::size_t>(p) + 1);
    basis[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = t - knots_[span + 1 - static_cast<std::size_t>(j)];
        right[j] = knots_[span + static_cast<std::size_t>(j)] - t;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            double denom = right[r + 1] + left[j - r];
            double temp = denom != 0.0 ? basis[r] / denom : 0.0;
            basis[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        basis[j] = saved;
    }

    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (int r = 0; r <= p; ++r) {
        std::size_t idx = span - static_cast<std::size_t>(p) + static_cast<std::size_t>(r);
        if (idx < n) out[static_cast<Eigen::Index>(idx)] = basis[r];
    }
    return out;
}

Eigen::MatrixXd BsplineBasis::evaluate_at(const std::vector<double>& times) const {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(size_));
    for (std::size_t j = 0; j < times.size(); ++j)
        X.row(static_cast<Eigen::Index>(j)) = evaluate(times[j]).transpose();
    return X;
}

}  // namespace mess
