#include "mess/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace mess {

namespace {

// canonical rounding applied before any grid matching
std::int64_t canonical(double t) {
    return static_cast<std::int64_t>(std::llround(t * 1e9));
}

}  // namespace

TimeGrid TimeGrid::build(std::vector<double> times) {
    for (double t : times) {
        if (!std::isfinite(t)) throw std::invalid_argument("invalid time");
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end(),
                            [](double a, double b) { return canonical(a) == canonical(b); }),
                times.end());
    if (times.size() < 3) throw std::invalid_argument("grid too small");

    TimeGrid grid;
    grid.points_ = std::move(times);
    grid.gaps_.resize(grid.points_.size() - 1);
    for (std::size_t r = 0; r + 1 < grid.points_.size(); ++r)
        grid.gaps_[r] = grid.points_[r + 1] - grid.points_[r];
    return grid;
}

std::ptrdiff_t TimeGrid::index_of(double t) const {
    const std::int64_t key = canonical(t);
    auto it = std::lower_bound(points_.begin(), points_.end(), t,
                               [](double p, double v) { return canonical(p) < canonical(v); });
    if (it != points_.end() && canonical(*it) == key) return it - points_.begin();
    return -1;
}

Eigen::MatrixXd roughness_matrix(const TimeGrid& grid) {
    const std::size_t m = grid.size();
    if (m < 3) throw std::invalid_argument("grid too small");
    const auto& h = grid.gaps();

    // Q: m x (m-2) banded, R: (m-2) x (m-2) tridiagonal
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(m, m - 2);
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(m - 2, m - 2);
    for (std::size_t j = 0; j < m - 2; ++j) {
        Q(j, j) = 1.0 / h[j];
        Q(j + 1, j) = -1.0 / h[j] - 1.0 / h[j + 1];
        Q(j + 2, j) = 1.0 / h[j + 1];
        R(j, j) = (h[j] + h[j + 1]) / 3.0;
        if (j + 1 < m - 2) {
            R(j, j + 1) = h[j + 1] / 6.0;
            R(j + 1, j) = h[j + 1] / 6.0;
        }
    }
    Eigen::MatrixXd G = Q * R.ldlt().solve(Q.transpose());
    return 0.5 * (G + G.transpose());
}

IncidenceMatrix IncidenceMatrix::build(const std::vector<double>& times, const TimeGrid& grid) {
    if (times.size() < 2) throw std::invalid_argument("too few observations");
    IncidenceMatrix inc;
    inc.grid_size_ = grid.size();
    inc.columns_.reserve(times.size());
    for (double t : times) {
        std::ptrdiff_t r = grid.index_of(t);
        if (r < 0) throw std::invalid_argument("off-grid observation");
        inc.columns_.push_back(static_cast<std::size_t>(r));
    }
    return inc;
}

Eigen::MatrixXd IncidenceMatrix::dense() const {
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(columns_.size(), grid_size_);
    for (std::size_t j = 0; j < columns_.size(); ++j) X(j, columns_[j]) = 1.0;
    return X;
}

Eigen::VectorXd IncidenceMatrix::apply(const Eigen::VectorXd& grid_vector) const {
    Eigen::VectorXd out(columns_.size());
    for (std::size_t j = 0; j < columns_.size(); ++j) out[j] = grid_vector[columns_[j]];
    return out;
}

Eigen::VectorXd IncidenceMatrix::scatter(const Eigen::VectorXd& obs_vector) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(grid_size_);
    for (std::size_t j = 0; j < columns_.size(); ++j) out[columns_[j]] += obs_vector[j];
    return out;
}

Eigen::MatrixXd IncidenceMatrix::project(const Eigen::MatrixXd& grid_matrix) const {
    const std::size_t n = columns_.size();
    Eigen::MatrixXd out(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t s = 0; s < n; ++s) out(r, s) = grid_matrix(columns_[r], columns_[s]);
    return out;
}

CurveOnGrid::CurveOnGrid(TimeGrid grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    const std::size_t m = grid_.size();
    if (static_cast<std::size_t>(values_.size()) != m)
        throw std::invalid_argument("curve values do not match grid");

    // tridiagonal solve for interior second derivatives, natural boundary
    second_ = Eigen::VectorXd::Zero(m);
    const std::size_t n = m - 2;
    if (n == 0) return;
    const auto& h = grid_.gaps();
    std::vector<double> diag(n), off(n), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        diag[i] = 2.0 * (h[i] + h[i + 1]);
        off[i] = h[i + 1];
        rhs[i] = 6.0 * ((values_[i + 2] - values_[i + 1]) / h[i + 1] -
                        (values_[i + 1] - values_[i]) / h[i]);
    }
    // Thomas algorithm
    for (std::size_t i = 1; i < n; ++i) {
        double w = h[i] / diag[i - 1];
        diag[i] -= w * off[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    second_[n] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i >= 1; --i)
        second_[i] = (rhs[i - 1] - off[i - 1] * second_[i + 1]) / diag[i - 1];
}

double CurveOnGrid::operator()(double t) const {
    const auto& x = grid_.points();
    if (t < x.front() || t > x.back()) throw std::domain_error("extrapolation not supported");
    std::size_t r = std::upper_bound(x.begin(), x.end(), t) - x.begin();
    if (r == 0) r = 1;
    if (r > x.size() - 1) r = x.size() - 1;
    --r;  // interval [x[r], x[r+1]]
    const double h = x[r + 1] - x[r];
    const double A = (x[r + 1] - t) / h;
    const double B = 1.0 - A;
    return A * values_[r] + B * values_[r + 1] +
           ((A * A * A - A) * second_[r] + (B * B * B - B) * second_[r + 1]) * h * h / 6.0;
}

double l2_distance(const CurveOnGrid& a, const CurveOnGrid& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("grid mismatch");
    if (a.values() == b.values()) return 0.0;
    // interpolation is linear in the values, so the difference of the two
    // splines is the spline of the difference
    CurveOnGrid diff(a.grid(), a.values() - b.values());
    constexpr std::size_t kIntervals = 1 << 10;
    const double lo = a.grid().front();
    const double hi = a.grid().back();
    const double step = (hi - lo) / static_cast<double>(kIntervals);
    auto sq = [&diff](double t) {
        double d = diff(t);
        return d * d;
    };
    double sum = sq(lo) + sq(hi);
    for (std::size_t i = 1; i < kIntervals; ++i)
        sum += (i % 2 ? 4.0 : 2.0) * sq(lo + step * static_cast<double>(i));
    return sum * step / 3.0;
}

}  // namespace mess
