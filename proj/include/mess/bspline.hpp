#ifndef MESS_BSPLINE_HPP
#define MESS_BSPLINE_HPP

#include <vector>

#include <Eigen/Dense>

namespace mess {

// Clamped B-spline basis (Cox-de Boor). Dimension = #interior knots + degree + 1.
class BsplineBasis {
public:
    BsplineBasis(double lo, double hi, std::vector<double> interior_knots, int degree = 3);

    int degree() const { return degree_; }
    std::size_t size() const { return size_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

    // basis values at t; rows sum to 1 on [lo, hi]
    Eigen::VectorXd evaluate(double t) const;
    Eigen::MatrixXd evaluate_at(const std::vector<double>& times) const;

private:
    double lo_, hi_;
    int degree_;
    std::size_t size_;
    std::vector<double> knots_;  // full clamped knot vector
};

}  // namespace mess

#endif
