#ifndef MESS_SPLINE_HPP
#define MESS_SPLINE_HPP

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace mess {

// The distinct design time points tau_1 < ... < tau_m shared by one gene.
class TimeGrid {
public:
    TimeGrid() = default;  // empty placeholder; use build() for a valid grid

    // Sorts, deduplicates (after canonical rounding to 1e-9) and validates.
    static TimeGrid build(std::vector<double> times);

    const std::vector<double>& points() const { return points_; }
    const std::vector<double>& gaps() const { return gaps_; }
    std::size_t size() const { return points_.size(); }
    double point(std::size_t r) const { return points_[r]; }
    double front() const { return points_.front(); }
    double back() const { return points_.back(); }
    double range() const { return points_.back() - points_.front(); }

    // Index of a grid point matching t after canonical rounding; -1 if off-grid.
    std::ptrdiff_t index_of(double t) const;

    bool operator==(const TimeGrid& other) const { return points_ == other.points_; }

private:
    std::vector<double> points_;
    std::vector<double> gaps_;
};

// Green-Silverman roughness matrix G = Q R^-1 Q^T such that y^T G y is the
// integrated squared second derivative of the natural cubic interpolant of y.
Eigen::MatrixXd roughness_matrix(const TimeGrid& grid);

// Maps an individual's observations onto grid columns: row j has a single 1
// in the column of its design time point. Stored sparsely as column indices.
class IncidenceMatrix {
public:
    static IncidenceMatrix build(const std::vector<double>& times, const TimeGrid& grid);

    std::size_t rows() const { return columns_.size(); }
    std::size_t grid_size() const { return grid_size_; }
    const std::vector<std::size_t>& columns() const { return columns_; }

    Eigen::MatrixXd dense() const;

    // X * v: pick observed grid entries
    Eigen::VectorXd apply(const Eigen::VectorXd& grid_vector) const;
    // X^T * r: scatter observation-space vector back onto the grid
    Eigen::VectorXd scatter(const Eigen::VectorXd& obs_vector) const;
    // X * M * X^T: submatrix of a grid-sized square matrix
    Eigen::MatrixXd project(const Eigen::MatrixXd& grid_matrix) const;

private:
    std::vector<std::size_t> columns_;
    std::size_t grid_size_ = 0;
};

// Natural cubic spline interpolant through (tau_r, value_r).
class CurveOnGrid {
public:
    CurveOnGrid(TimeGrid grid, Eigen::VectorXd values);

    const TimeGrid& grid() const { return grid_; }
    const Eigen::VectorXd& values() const { return values_; }
    // second derivatives at the grid points (zero at both ends)
    const Eigen::VectorXd& curvature() const { return second_; }

    // Evaluate at t within [tau_1, tau_m]; extrapolation refused.
    double operator()(double t) const;

private:
    TimeGrid grid_;
    Eigen::VectorXd values_;
    Eigen::VectorXd second_;
};

// Integral over [tau_1, tau_m] of the squared difference of two curves
// sharing one grid. Composite Simpson on 2^10 uniform intervals.
double l2_distance(const CurveOnGrid& a, const CurveOnGrid& b);

}  // namespace mess

#endif
