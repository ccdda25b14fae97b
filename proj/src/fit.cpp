#include "mess/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mess {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSigma2Floor = 1e-10;

struct Regularized {
    Eigen::MatrixXd Dv;     // (D^-1 + lambda_v G)^-1, zero when D is zero
    Eigen::MatrixXd Dinv;   // valid only when has_logdets
    double logdet_D = 0.0;
    double logdet_Dv = 0.0;
    bool has_logdets = false;
    std::vector<Eigen::LLT<Eigen::MatrixXd>> V_llt;  // V_i = X_i Dv X_i' + sigma2 I
    std::vector<Eigen::MatrixXd> V_inv;
};

double logdet_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Regularized regularize(const LongitudinalSample& sample, const VarianceComponents& components,
                       const SmoothingPair& smoothing, const Eigen::MatrixXd& G) {
    const Eigen::Index m = components.D.rows();
    Regularized reg;
    if (components.D.norm() == 0.0) {
        reg.Dv = Eigen::MatrixXd::Zero(m, m);
    } else {
        Eigen::LLT<Eigen::MatrixXd> llt_D(components.D);
        if (llt_D.info() != Eigen::Success)
            throw std::runtime_error("variance components degenerate");
        reg.Dinv = llt_D.solve(Eigen::MatrixXd::Identity(m, m));
        Eigen::MatrixXd A = reg.Dinv + smoothing.lambda_v * G;
        A = 0.5 * (A + A.transpose());
        Eigen::LLT<Eigen::MatrixXd> llt_A(A);
        if (llt_A.info() != Eigen::Success)
            throw std::runtime_error("variance components degenerate");
        reg.Dv = llt_A.solve(Eigen::MatrixXd::Identity(m, m));
        reg.Dv = 0.5 * (reg.Dv + reg.Dv.transpose());
        reg.logdet_D = logdet_from_llt(llt_D);
        reg.logdet_Dv = -logdet_from_llt(llt_A);
        reg.has_logdets = true;
    }

    reg.V_llt.reserve(sample.individuals.size());
    reg.V_inv.reserve(sample.individuals.size());
    for (const auto& ind : sample.individuals) {
        const Eigen::Index mi = static_cast<Eigen::Index>(ind.incidence.rows());
        Eigen::MatrixXd V = ind.incidence.project(reg.Dv) +
                            components.sigma2 * Eigen::MatrixXd::Identity(mi, mi);
        Eigen::LLT<Eigen::MatrixXd> llt(V);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("variance components degenerate");
        reg.V_inv.push_back(llt.solve(Eigen::MatrixXd::Identity(mi, mi)));
        reg.V_llt.push_back(std::move(llt));
    }
    return reg;
}

Eigen::VectorXd solve_mean(const LongitudinalSample& sample, const Regularized& reg,
                           double lambda, const Eigen::MatrixXd& G) {
    const std::size_t m = sample.grid.size();
    Eigen::MatrixXd M = lambda * G;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (std::size_t i = 0; i < sample.individuals.size(); ++i) {
        const auto& ind = sample.individuals[i];
        const auto& cols = ind.incidence.columns();
        const Eigen::MatrixXd& Vinv = reg.V_inv[i];
        Eigen::VectorXd w = Vinv * ind.y;
        for (std::size_t r = 0; r < cols.size(); ++r) {
            rhs[cols[r]] += w[r];
            for (std::size_t s = 0; s < cols.size(); ++s) M(cols[r], cols[s]) += Vinv(r, s);
        }
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    Eigen::VectorXd eta = ldlt.solve(rhs);
    // residual tolerance scaled by the magnitudes entering M*eta, so a huge
    // well-conditioned penalty term does not trip the singularity check
    double scale = std::max({1.0, rhs.norm(), M.cwiseAbs().maxCoeff() * eta.norm()});
    if (!eta.allFinite() || (M * eta - rhs).norm() > 1e-8 * scale)
        throw std::runtime_error("mean system singular");
    return eta;
}

Eigen::VectorXd blup_one(const IndividualData& ind, const Regularized& reg, std::size_t i,
                         const Eigen::VectorXd& eta) {
    Eigen::VectorXd resid = ind.y - ind.incidence.apply(eta);
    return reg.Dv * ind.incidence.scatter(reg.V_inv[i] * resid);
}

// marginal penalized criterion the EM iteration monotonically decreases:
// sum_i { log|D| - log|Dv| + log|V_i| + r_i' V_i^-1 r_i } + lambda eta'G eta
double em_objective_value(const LongitudinalSample& sample, const Regularized& reg,
                          const Eigen::VectorXd& eta, double lambda, const Eigen::MatrixXd& G) {
    double obj = lambda * eta.dot(G * eta);
    for (std::size_t i = 0; i < sample.individuals.size(); ++i) {
        const auto& ind = sample.individuals[i];
        Eigen::VectorXd r = ind.y - ind.incidence.apply(eta);
        obj += logdet_from_llt(reg.V_llt[i]) + r.dot(reg.V_inv[i] * r);
        if (reg.has_logdets) obj += reg.logdet_D - reg.logdet_Dv;
    }
    return obj;
}

struct AiccResult {
    double aicc;
    double df;
};

AiccResult aicc_impl(const LongitudinalSample& sample, const Regularized& reg,
                     const Eigen::VectorXd& eta, const std::vector<Eigen::VectorXd>& v_hat,
                     const VarianceComponents& components, const SmoothingPair& smoothing,
                     const Eigen::MatrixXd& G) {
    const std::size_t m = sample.grid.size();
    const double N = static_cast<double>(sample.total_observations());
    const double n_k = static_cast<double>(sample.individuals.size());

    // effective df: trace of the mean-curve hat matrix plus the per-individual
    // smoother trace averaged over individuals plus 2 variance parameters
    Eigen::MatrixXd M = smoothing.lambda * G;
    for (std::size_t i = 0; i < sample.individuals.size(); ++i) {
        const auto& cols = sample.individuals[i].incidence.columns();
        const Eigen::MatrixXd& Vinv = reg.V_inv[i];
        for (std::size_t r = 0; r < cols.size(); ++r)
            for (std::size_t s = 0; s < cols.size(); ++s) M(cols[r], cols[s]) += Vinv(r, s);
    }
    Eigen::MatrixXd Minv =
        M.ldlt().solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m),
                                                 static_cast<Eigen::Index>(m)));
    double trace_mean = 0.0;
    double trace_indiv = 0.0;
    for (std::size_t i = 0; i < sample.individuals.size(); ++i) {
        const auto& inc = sample.individuals[i].incidence;
        trace_mean += reg.V_inv[i].cwiseProduct(inc.project(Minv)).sum();
        trace_indiv += reg.V_inv[i].cwiseProduct(inc.project(reg.Dv)).sum();
    }
    const double k = trace_mean + trace_indiv / n_k + 2.0;

    // unpenalized generalized log-likelihood at the fitted values:
    // ||y - X eta - X v||^2/sigma^2 + m_i log sigma^2 + v'D^-1 v + log|D|,
    // with D the estimated (eigenvalue-floored) covariance, not the
    // lambda_v-regularized D_v whose log-determinant is unbounded in lambda_v.
    double minus2ll = 0.0;
    Eigen::LLT<Eigen::MatrixXd> d_llt(components.D);
    const Eigen::MatrixXd D_inv = d_llt.solve(
        Eigen::MatrixXd::Identity(components.D.rows(), components.D.cols()));
    const double logdet_D = logdet_from_llt(d_llt);
    for (std::size_t i = 0; i < sample.individuals.size(); ++i) {
        const auto& ind = sample.individuals[i];
        Eigen::VectorXd r = ind.y - ind.incidence.apply(eta) - ind.incidence.apply(v_hat[i]);
        minus2ll += r.squaredNorm() / components.sigma2 +
                    static_cast<double>(ind.y.size()) * std::log(components.sigma2) +
                    v_hat[i].dot(D_inv * v_hat[i]) + logdet_D;
    }

    if (N - k - 1.0 <= 0.0) return {kInf, k};
    return {minus2ll + 2.0 * k * N / (N - k - 1.0), k};
}

// eigenvalue floor keeping D safely positive definite
bool floor_psd(Eigen::MatrixXd& D) {
    const Eigen::Index m = D.rows();
    double tr = D.trace();
    if (!(tr > 1e-12)) {
        D = 1e-12 * Eigen::MatrixXd::Identity(m, m);
        return true;
    }
    const double floor = 1e-8 * tr / static_cast<double>(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
    if (es.eigenvalues().minCoeff() >= floor) return false;
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor);
    D = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    D = 0.5 * (D + D.transpose());
    return true;
}

}  // namespace

std::size_t LongitudinalSample::total_observations() const {
    std::size_t n = 0;
    for (const auto& ind : individuals) n += ind.incidence.rows();
    return n;
}

void LongitudinalSample::validate() const {
    if (individuals.size() < 2) throw std::invalid_argument("too few individuals");
    for (const auto& ind : individuals) {
        if (ind.incidence.rows() < 2) throw std::invalid_argument("too few observations");
        if (static_cast<std::size_t>(ind.y.size()) != ind.incidence.rows())
            throw std::invalid_argument("observation length mismatch");
        if (!ind.y.allFinite()) throw std::invalid_argument("non-finite observation");
    }
}

double penalized_gll(const LongitudinalSample& sample, const CurveOnGrid& eta,
                     const std::vector<CurveOnGrid>& deviations,
                     const VarianceComponents& components, const SmoothingPair& smoothing) {
    const Eigen::Index m = components.D.rows();
    Eigen::LLT<Eigen::MatrixXd> llt_D(components.D);
    if (llt_D.info() != Eigen::Success)
        throw std::runtime_error("variance components degenerate");
    const double logdet_D = logdet_from_llt(llt_D);
    const Eigen::MatrixXd Dinv = llt_D.solve(Eigen::MatrixXd::Identity(m, m));
    const Eigen::MatrixXd G = roughness_matrix(sample.grid);

    double obj = smoothing.lambda * eta.values().dot(G * eta.values());
    for (std::size_t i = 0; i < sample.individuals.size(); ++i) {
        const auto& ind = sample.individuals[i];
        const Eigen::VectorXd& v = deviations[i].values();
        Eigen::VectorXd r = ind.y - ind.incidence.apply(eta.values()) - ind.incidence.apply(v);
        obj += r.squaredNorm() / components.sigma2 +
               static_cast<double>(ind.incidence.rows()) * std::log(components.sigma2) +
               logdet_D + v.dot(Dinv * v) + smoothing.lambda_v * v.dot(G * v);
    }
    return obj;
}

CurveOnGrid estimate_mean(const LongitudinalSample& sample, const VarianceComponents& components,
                          const SmoothingPair& smoothing) {
    const Eigen::MatrixXd G = roughness_matrix(sample.grid);
    Regularized reg = regularize(sample, components, smoothing, G);
    return {sample.grid, solve_mean(sample, reg, smoothing.lambda, G)};
}

std::vector<CurveOnGrid> blup_individuals(const LongitudinalSample& sample, const CurveOnGrid& eta,
                                          const VarianceComponents& components,
                                          const SmoothingPair& smoothing) {
    const Eigen::MatrixXd G = roughness_matrix(sample.grid);
    Regularized reg = regularize(sample, components, smoothing, G);
    std::vector<CurveOnGrid> out;
    out.reserve(sample.individuals.size());
    for (std::size_t i = 0; i < sample.individuals.size(); ++i)
        out.emplace_back(sample.grid, blup_one(sample.individuals[i], reg, i, eta.values()));
    return out;
}

GroupFit em_fit(const LongitudinalSample& sample, const SmoothingPair& smoothing,
                const FitConfig& config) {
    sample.validate();
    const std::size_t m = sample.grid.size();
    const Eigen::MatrixXd G = roughness_matrix(sample.grid);
    const double n_k = static_cast<double>(sample.individuals.size());
    const double N = static_cast<double>(sample.total_observations());

    // initial components: D = 0.1 I, sigma2 from a mean-only fit
    VarianceComponents components;
    components.D = 0.1 * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m),
                                                   static_cast<Eigen::Index>(m));
    components.sigma2 = 1.0;
    bool floored = false;
    {
        VarianceComponents plain{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                                       static_cast<Eigen::Index>(m)),
                                 1.0};
        Regularized reg0 = regularize(sample, plain, smoothing, G);
        Eigen::VectorXd eta0 = solve_mean(sample, reg0, smoothing.lambda, G);
        double rss = 0.0;
        for (const auto& ind : sample.individuals)
            rss += (ind.y - ind.incidence.apply(eta0)).squaredNorm();
        components.sigma2 = rss / N;
        if (components.sigma2 < kSigma2Floor) {
            components.sigma2 = kSigma2Floor;
            floored = true;
        }
    }

    Eigen::VectorXd eta;
    std::vector<Eigen::VectorXd> v_hat(sample.individuals.size());
    Regularized reg;
    std::vector<double> trace;
    double prev = kInf;
    bool converged = false;
    int iterations = 0;
    // previous accepted iterate, for reverting when a floored step backtracks
    Eigen::VectorXd eta_prev;
    std::vector<Eigen::VectorXd> v_hat_prev;
    Regularized reg_prev;
    VarianceComponents components_prev;

    for (int iter = 1; iter <= config.max_em_iterations; ++iter) {
        iterations = iter;
        reg = regularize(sample, components, smoothing, G);
        eta = solve_mean(sample, reg, smoothing.lambda, G);
        for (std::size_t i = 0; i < sample.individuals.size(); ++i)
            v_hat[i] = blup_one(sample.individuals[i], reg, i, eta);

        const double obj = em_objective_value(sample, reg, eta, smoothing.lambda, G);
        if (std::isfinite(prev) && obj > prev) {
            // the variance floor deflected the step uphill: the constrained
            // optimum sits on the floor boundary, so keep the last iterate
            eta = eta_prev;
            v_hat = v_hat_prev;
            reg = reg_prev;
            components = components_prev;
            iterations = iter - 1;
            break;
        }
        trace.push_back(obj);
        if (std::isfinite(prev) &&
            std::abs(obj - prev) <= config.em_rel_tol * (1.0 + std::abs(prev))) {
            converged = true;
            break;
        }
        prev = obj;
        if (iter == config.max_em_iterations) break;
        eta_prev = eta;
        v_hat_prev = v_hat;
        reg_prev = reg;
        components_prev = components;

        // M-step
        Eigen::MatrixXd D_new = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                                      static_cast<Eigen::Index>(m));
        double sse = 0.0;
        for (std::size_t i = 0; i < sample.individuals.size(); ++i) {
            const auto& ind = sample.individuals[i];
            // conditional covariance C_i = Dv - Dv X' Vinv X Dv
            Eigen::MatrixXd DvXt(static_cast<Eigen::Index>(m),
                                 static_cast<Eigen::Index>(ind.incidence.rows()));
            const auto& cols = ind.incidence.columns();
            for (std::size_t j = 0; j < cols.size(); ++j)
                DvXt.col(static_cast<Eigen::Index>(j)) =
                    reg.Dv.col(static_cast<Eigen::Index>(cols[j]));
            Eigen::MatrixXd C = reg.Dv - DvXt * reg.V_inv[i] * DvXt.transpose();
            D_new += v_hat[i] * v_hat[i].transpose() + C;
            Eigen::VectorXd r = ind.y - ind.incidence.apply(eta) - ind.incidence.apply(v_hat[i]);
            sse += r.squaredNorm() + ind.incidence.project(C).trace();
        }
        D_new /= n_k;
        D_new = 0.5 * (D_new + D_new.transpose());
        floored = floor_psd(D_new) || floored;
        components.D = D_new;
        components.sigma2 = sse / N;
        if (components.sigma2 < kSigma2Floor) {
            components.sigma2 = kSigma2Floor;
            floored = true;
        }
    }

    GroupFit fit{CurveOnGrid(sample.grid, eta),
                 {},
                 components,
                 smoothing,
                 reg.Dv,
                 0.0,
                 trace.back(),
                 0.0,
                 0.0,
                 iterations,
                 converged,
                 floored,
                 std::move(trace)};
    fit.deviations.reserve(sample.individuals.size());
    for (const auto& v : v_hat) fit.deviations.emplace_back(sample.grid, v);
    fit.penalized_gll = penalized_gll(sample, fit.eta, fit.deviations, components, smoothing);
    AiccResult a = aicc_impl(sample, reg, eta, v_hat, components, smoothing, G);
    fit.aicc = a.aicc;
    fit.effective_df = a.df;
    return fit;
}

double aicc_score(const GroupFit& fit, const LongitudinalSample& sample) {
    const Eigen::MatrixXd G = roughness_matrix(sample.grid);
    Regularized reg = regularize(sample, fit.components, fit.smoothing, G);
    std::vector<Eigen::VectorXd> v_hat;
    v_hat.reserve(fit.deviations.size());
    for (const auto& d : fit.deviations) v_hat.push_back(d.values());
    return aicc_impl(sample, reg, fit.eta.values(), v_hat, fit.components, fit.smoothing, G).aicc;
}

namespace {

struct Vertex {
    Eigen::Vector2d x;
    double f;
};

}  // namespace

GroupFit select_smoothing(const LongitudinalSample& sample, const FitConfig& config) {
    sample.validate();

    int evaluations = 0;
    double best_f = kInf;
    Eigen::Vector2d best_x(0.0, 0.0);
    bool have_best = false;
    std::string last_error;

    auto clamp = [&config](Eigen::Vector2d x) {
        x[0] = std::clamp(x[0], config.log10_lo, config.log10_hi);
        x[1] = std::clamp(x[1], config.log10_lo, config.log10_hi);
        return x;
    };

    auto evaluate = [&](const Eigen::Vector2d& x) -> double {
        ++evaluations;
        double f = kInf;
        try {
            SmoothingPair s{std::pow(10.0, x[0]), std::pow(10.0, x[1])};
            f = em_fit(sample, s, config).aicc;
        } catch (const std::exception& e) {
            last_error = e.what();
        }
        if (f < best_f) {
            best_f = f;
            best_x = x;
            have_best = true;
        }
        return f;
    };

    // coarse deterministic presearch over the whole box: the criterion surface
    // can be multimodal (a basin at moderate smoothing and a cliff at the
    // lambda_v bound), and the simplex alone only finds the local basin
    const int presearch = 5;
    for (int i = 0; i < presearch; ++i)
        for (int j = 0; j < presearch; ++j) {
            const double step = (config.log10_hi - config.log10_lo) / (presearch - 1);
            evaluate({config.log10_lo + step * i, config.log10_lo + step * j});
        }
    evaluations = 0;  // the presearch does not consume the simplex budget

    std::array<Vertex, 3> simplex{Vertex{clamp({0.0, 0.0}), 0.0},
                                  Vertex{clamp({2.0, 0.0}), 0.0},
                                  Vertex{clamp({0.0, 2.0}), 0.0}};
    for (auto& v : simplex) v.f = evaluate(v.x);

    auto order = [&simplex] {
        std::stable_sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) {
            if (a.f != b.f) return a.f < b.f;
            if (a.x[0] != b.x[0]) return a.x[0] < b.x[0];
            return a.x[1] < b.x[1];
        });
    };

    while (evaluations < config.max_evaluations) {
        order();
        const double spread = simplex[2].f - simplex[0].f;
        if (std::isfinite(spread) && spread < config.simplex_spread_tol) break;
        if (!std::isfinite(simplex[0].f)) break;  // nothing fits anywhere

        const Eigen::Vector2d centroid = 0.5 * (simplex[0].x + simplex[1].x);
        const Eigen::Vector2d reflected = clamp(centroid + (centroid - simplex[2].x));
        const double fr = evaluate(reflected);

        if (fr < simplex[0].f) {
            if (evaluations < config.max_evaluations) {
                const Eigen::Vector2d expanded =
                    clamp(centroid + 2.0 * (centroid - simplex[2].x));
                const double fe = evaluate(expanded);
                simplex[2] = fe < fr ? Vertex{expanded, fe} : Vertex{reflected, fr};
            } else {
                simplex[2] = {reflected, fr};
            }
        } else if (fr < simplex[1].f) {
            simplex[2] = {reflected, fr};
        } else {
            const bool outside = fr < simplex[2].f;
            const Eigen::Vector2d target = outside ? reflected : simplex[2].x;
            const Eigen::Vector2d contracted = clamp(centroid + 0.5 * (target - centroid));
            if (evaluations >= config.max_evaluations) break;
            const double fc = evaluate(contracted);
            if (fc < std::min(fr, simplex[2].f)) {
                simplex[2] = {contracted, fc};
            } else {
                // shrink toward the best vertex
                for (int i = 1; i < 3; ++i) {
                    if (evaluations >= config.max_evaluations) break;
                    simplex[i].x = clamp(simplex[0].x + 0.5 * (simplex[i].x - simplex[0].x));
                    simplex[i].f = evaluate(simplex[i].x);
                }
            }
        }
    }

    if (!have_best || !std::isfinite(best_f))
        throw std::runtime_error("model selection failed: " +
                                 (last_error.empty() ? std::string("no finite AICc") : last_error));
    SmoothingPair s{std::pow(10.0, best_x[0]), std::pow(10.0, best_x[1])};
    return em_fit(sample, s, config);
}

std::pair<GroupFit, GroupFit> fit_gene(const GenePair& gene, const FitConfig& config) {
    if (gene.group1.individuals.empty() || gene.group2.individuals.empty())
        throw std::invalid_argument("missing group");
    return {select_smoothing(gene.group1, config), select_smoothing(gene.group2, config)};
}

}  // namespace mess
