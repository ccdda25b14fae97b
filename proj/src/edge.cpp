#include "mess/edge.hpp"

#include <limits>
#include <stdexcept>

#include "mess/bspline.hpp"

namespace mess {

namespace {

BsplineBasis edge_basis(double lo, double hi, int dim) {
    const int degree = std::min(3, dim - 1);
    const int interior = dim - degree - 1;
    std::vector<double> knots;
    knots.reserve(static_cast<std::size_t>(interior));
    for (int j = 1; j <= interior; ++j)
        knots.push_back(lo + (hi - lo) * static_cast<double>(j) / (interior + 1));
    return BsplineBasis(lo, hi, std::move(knots), degree);
}

struct Stacked {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<std::size_t> individual;  // 0-based over both groups
    std::vector<int> group;               // 0 or 1
};

void stack_group(const LongitudinalSample& sample, int group, std::size_t offset, Stacked& out) {
    for (std::size_t i = 0; i < sample.individuals.size(); ++i) {
        const auto& ind = sample.individuals[i];
        const auto& cols = ind.incidence.columns();
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out.times.push_back(sample.grid.point(cols[j]));
            out.values.push_back(ind.y[static_cast<Eigen::Index>(j)]);
            out.individual.push_back(offset + i);
            out.group.push_back(group);
        }
    }
}

// sum-to-zero contrast columns for a block of individuals
void add_contrasts(Eigen::MatrixXd& X, Eigen::Index col0, const Stacked& data,
                   std::size_t first, std::size_t last) {
    for (std::size_t j = first; j + 1 <= last; ++j) {
        const Eigen::Index col = col0 + static_cast<Eigen::Index>(j - first);
        for (std::size_t row = 0; row < data.individual.size(); ++row) {
            if (data.individual[row] == j) X(static_cast<Eigen::Index>(row), col) = 1.0;
            if (data.individual[row] == last) X(static_cast<Eigen::Index>(row), col) = -1.0;
        }
    }
}

std::vector<double> recover_shifts(const Eigen::VectorXd& theta, Eigen::Index col0,
                                   std::size_t count) {
    std::vector<double> shifts(count, 0.0);
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < count; ++j) {
        shifts[j] = theta[col0 + static_cast<Eigen::Index>(j)];
        sum += shifts[j];
    }
    if (count > 0) shifts[count - 1] = -sum;
    return shifts;
}

}  // namespace

EdgeFit fit_edge(const GenePair& gene, int basis_dim) {
    if (basis_dim < 2) throw std::invalid_argument("basis dimension must be >= 2");
    if (gene.group1.individuals.empty() || gene.group2.individuals.empty())
        throw std::invalid_argument("missing group");

    Stacked data;
    const std::size_t n1 = gene.group1.individuals.size();
    const std::size_t n2 = gene.group2.individuals.size();
    stack_group(gene.group1, 0, 0, data);
    stack_group(gene.group2, 1, n1, data);
    const std::size_t nobs = data.values.size();

    const BsplineBasis basis =
        edge_basis(gene.group1.grid.front(), gene.group1.grid.back(), basis_dim);
    const Eigen::Index dim = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd B(static_cast<Eigen::Index>(nobs), dim);
    for (std::size_t row = 0; row < nobs; ++row)
        B.row(static_cast<Eigen::Index>(row)) = basis.evaluate(data.times[row]).transpose();
    Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(data.values.data(),
                                                    static_cast<Eigen::Index>(nobs));

    // full model: separate curves per group, shifts centered within group
    const Eigen::Index full_cols = 2 * dim + static_cast<Eigen::Index>(n1 - 1 + n2 - 1);
    Eigen::MatrixXd Xf = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nobs), full_cols);
    for (std::size_t row = 0; row < nobs; ++row) {
        const Eigen::Index base = data.group[row] == 0 ? 0 : dim;
        Xf.block(static_cast<Eigen::Index>(row), base, 1, dim) =
            B.row(static_cast<Eigen::Index>(row));
    }
    add_contrasts(Xf, 2 * dim, data, 0, n1 - 1);
    add_contrasts(Xf, 2 * dim + static_cast<Eigen::Index>(n1 - 1), data, n1, n1 + n2 - 1);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_full(Xf);
    if (qr_full.rank() < full_cols) throw std::runtime_error("basis too rich for design");
    Eigen::VectorXd theta_full = qr_full.solve(y);

    // null model: one shared curve, shifts centered over all individuals
    const Eigen::Index null_cols = dim + static_cast<Eigen::Index>(n1 + n2 - 1);
    Eigen::MatrixXd Xn = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nobs), null_cols);
    Xn.leftCols(dim) = B;
    add_contrasts(Xn, dim, data, 0, n1 + n2 - 1);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_null(Xn);
    if (qr_null.rank() < null_cols) throw std::runtime_error("basis too rich for design");
    Eigen::VectorXd theta_null = qr_null.solve(y);

    EdgeFit fit;
    fit.basis_dim = static_cast<int>(dim);
    fit.beta_group1 = theta_full.head(dim);
    fit.beta_group2 = theta_full.segment(dim, dim);
    fit.beta_shared = theta_null.head(dim);
    fit.shifts_group1 = recover_shifts(theta_full, 2 * dim, n1);
    fit.shifts_group2 = recover_shifts(theta_full, 2 * dim + static_cast<Eigen::Index>(n1 - 1), n2);
    fit.rss_full = (y - Xf * theta_full).squaredNorm();
    fit.rss_null = (y - Xn * theta_null).squaredNorm();
    return fit;
}

double f_statistic(const EdgeFit& fit) {
    if (fit.rss_full <= 0.0)
        return fit.rss_null <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return (fit.rss_null - fit.rss_full) / fit.rss_full;
}

}  // namespace mess
