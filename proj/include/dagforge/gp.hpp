#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dagforge/common.hpp"
#include "dagforge/dataset.hpp"
#include "dagforge/regression.hpp"

namespace dagforge {

struct GpConfig {
    double alpha = 1.0;  // diagonal regularization (noise variance in the GP view)
    std::vector<double> length_scale_grid = {0.1, 0.3, 1.0, 3.0, 10.0};
    double jitter = 1e-9;  // starting jitter for factorization rescue
};

// K[i,j] = exp(-|a_i - b_j|^2 / (2 l^2)), rows of a and b as points.
inline Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                  double length_scale) {
    if (a.cols() != b.cols())
        throw std::invalid_argument("rbf_kernel: point dimensions must match");
    if (!(length_scale > 0.0))
        throw std::invalid_argument("rbf_kernel: length_scale must be positive");
    const Eigen::VectorXd an = a.rowwise().squaredNorm();
    const Eigen::VectorXd bn = b.rowwise().squaredNorm();
    Eigen::MatrixXd sq = (-2.0 * a * b.transpose());
    sq.colwise() += an;
    sq.rowwise() += bn.transpose();
    // Rounding can leave slightly negative squared distances for coincident points.
    return (sq.array().max(0.0) * (-0.5 / (length_scale * length_scale))).exp();
}

namespace detail {

// Cholesky of spd + j*I, escalating j tenfold from `initial_jitter` (after one
// attempt with no jitter when initial_jitter <= 0) until it succeeds or j
// passes jitter_max. Reports the jitter actually used.
inline Eigen::LLT<Eigen::MatrixXd> cholesky_with_jitter(const Eigen::MatrixXd& spd,
                                                        double initial_jitter,
                                                        double* used_jitter = nullptr,
                                                        double jitter_max = 1e-3) {
    const Eigen::Index n = spd.rows();
    double j = initial_jitter > 0.0 ? initial_jitter : 0.0;
    for (;;) {
        Eigen::LLT<Eigen::MatrixXd> llt;
        if (j == 0.0) {
            llt.compute(spd);
        } else {
            Eigen::MatrixXd shifted = spd;
            shifted.diagonal().array() += j;
            llt.compute(shifted);
        }
        if (llt.info() == Eigen::Success) {
            if (used_jitter) *used_jitter = j;
            return llt;
        }
        j = j == 0.0 ? 1e-9 : j * 10.0;
        if (j > jitter_max * (1.0 + 1e-12))
            throw NumericError("cholesky_with_jitter: matrix not positive definite after jitter up to " +
                               std::to_string(jitter_max) + " on a " + std::to_string(n) + "x" +
                               std::to_string(n) + " matrix");
    }
}

}  // namespace detail

// Solve (spd + jitter*I) X = rhs by Cholesky, escalating the jitter tenfold on
// factorization failure (up to 1e-3) before giving up.
inline Eigen::MatrixXd cholesky_solve(const Eigen::MatrixXd& spd, const Eigen::MatrixXd& rhs,
                                      double jitter) {
    if (spd.rows() != spd.cols()) throw std::invalid_argument("cholesky_solve: matrix must be square");
    if (spd.rows() != rhs.rows()) throw std::invalid_argument("cholesky_solve: rhs row count mismatch");
    const auto llt = detail::cholesky_with_jitter(spd, jitter);
    return llt.solve(rhs);
}

// Log marginal likelihood of y under a zero-mean GP with kernel K + alpha*I:
//   -1/2 y^T (K+aI)^{-1} y - 1/2 log|K+aI| - n/2 log(2 pi).
// Inputs are taken as-is; gp_ssr standardizes before calling.
inline double gp_log_marginal_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y,
                                         double length_scale, const GpConfig& cfg) {
    const Eigen::Index n = inputs.rows();
    Eigen::MatrixXd k = rbf_kernel(inputs, inputs, length_scale);
    k.diagonal().array() += cfg.alpha;
    const auto llt = detail::cholesky_with_jitter(k, cfg.jitter);
    const Eigen::VectorXd w = llt.solve(y);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(llt.matrixLLT()(i, i));
    logdet *= 2.0;
    return -0.5 * y.dot(w) - 0.5 * logdet - 0.5 * n * std::log(2.0 * M_PI);
}

// Grid search over cfg.length_scale_grid by log marginal likelihood. Ties go
// to the larger length scale (the smoother fit), which is why the scan runs
// in ascending order with >=.
inline double gp_select_length_scale(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y,
                                     const GpConfig& cfg) {
    if (cfg.length_scale_grid.empty())
        throw std::invalid_argument("gp_select_length_scale: empty length-scale grid");
    std::vector<double> grid = cfg.length_scale_grid;
    std::sort(grid.begin(), grid.end());
    double best_ell = grid.front();
    double best_lml = -std::numeric_limits<double>::infinity();
    for (double ell : grid) {
        const double lml = gp_log_marginal_likelihood(inputs, y, ell, cfg);
        if (lml >= best_lml) {
            best_lml = lml;
            best_ell = ell;
        }
    }
    return best_ell;
}

// Sum of squared in-sample residuals of a GP regression of column `node` on the
// parent columns: posterior mean m = K (K + alpha I)^{-1} y evaluated at the
// training inputs, SSR = |y - m|^2.
//
// Inputs and target are standardized internally (zero mean, unit population
// variance) and the SSR is scaled back by var(y). Without this the marginal-
// likelihood grid is free to pick a vanishing length scale whenever var(y)
// is large: K collapses to the identity, the posterior mean memorizes y/2,
// and every parent set — relevant or not — gets SSR = |y|^2/4. Standardizing
// removes that escape hatch and changes nothing on already-standardized data.
inline double gp_ssr(const Dataset& ds, int node, const std::vector<int>& parents,
                     const GpConfig& cfg = {}) {
    const int d = ds.variable_count();
    if (node < 0 || node >= d) throw std::invalid_argument("gp_ssr: node out of range");
    for (int p : parents) {
        if (p < 0 || p >= d) throw std::invalid_argument("gp_ssr: parent out of range");
        if (p == node) throw std::invalid_argument("gp_ssr: node cannot be its own parent");
    }
    if (parents.empty()) return ols_fit(ds, node, parents).ssr;

    const Eigen::MatrixXd& x = ds.data();
    const Eigen::Index n = x.rows();

    Eigen::MatrixXd inputs(n, static_cast<Eigen::Index>(parents.size()));
    for (std::size_t a = 0; a < parents.size(); ++a) {
        Eigen::VectorXd col = x.col(parents[a]);
        const double mean = col.mean();
        col.array() -= mean;
        const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n));
        if (sd > 0.0) col /= sd;
        inputs.col(static_cast<Eigen::Index>(a)) = col;
    }

    Eigen::VectorXd y = x.col(node);
    const double y_mean = y.mean();
    y.array() -= y_mean;
    const double y_var = y.squaredNorm() / static_cast<double>(n);
    if (y_var == 0.0) return 0.0;  // constant target: perfect fit by the mean
    y /= std::sqrt(y_var);

    const double ell = gp_select_length_scale(inputs, y, cfg);
    const Eigen::MatrixXd k = rbf_kernel(inputs, inputs, ell);
    Eigen::MatrixXd ka = k;
    ka.diagonal().array() += cfg.alpha;
    const auto llt = detail::cholesky_with_jitter(ka, cfg.jitter);
    const Eigen::VectorXd mean = k * llt.solve(y);
    const double ssr_std = (y - mean).squaredNorm();
    return ssr_std * y_var;
}

// One joint draw f ~ N(0, K + jitter*I) over the given input rows, via the
// Cholesky factor times a standard-normal vector.
inline Eigen::VectorXd gp_sample_function(const Eigen::MatrixXd& inputs, double length_scale,
                                          Rng& rng, double jitter = 1e-9) {
    const Eigen::Index n = inputs.rows();
    if (n < 1) throw std::invalid_argument("gp_sample_function: need at least one input row");
    const Eigen::MatrixXd k = rbf_kernel(inputs, inputs, length_scale);
    const auto llt = detail::cholesky_with_jitter(k, jitter);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd xi(n);
    for (Eigen::Index i = 0; i < n; ++i) xi(i) = gauss(rng);
    return Eigen::MatrixXd(llt.matrixL()) * xi;
}

}  // namespace dagforge
