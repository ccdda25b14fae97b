#ifndef MESS_EDGE_HPP
#define MESS_EDGE_HPP

#include <vector>

#include <Eigen/Dense>

#include "mess/fit.hpp"

namespace mess {

// Simplified EDGE-style comparator: B-spline group mean curves with
// individual effects constrained to scalar shifts, scored by an F-type
// residual statistic. This is a faithful simplification built from the
// published description, not a port of the released EDGE software.
struct EdgeFit {
    Eigen::VectorXd beta_group1;
    Eigen::VectorXd beta_group2;
    Eigen::VectorXd beta_shared;          // null-model coefficients
    std::vector<double> shifts_group1;    // centered within each group
    std::vector<double> shifts_group2;
    double rss_full = 0.0;
    double rss_null = 0.0;
    int basis_dim = 0;
};

// Least-squares fit of the full (two curves) and null (one shared curve)
// models. Basis: cubic B-splines over the gene's time range with
// basis_dim - 4 uniformly spaced interior knots (dimension 5 puts the single
// knot at the midpoint, matching the simulator's truth basis).
EdgeFit fit_edge(const GenePair& gene, int basis_dim = 5);

// F = (RSS_null - RSS_full) / RSS_full
double f_statistic(const EdgeFit& fit);

}  // namespace mess

#endif
