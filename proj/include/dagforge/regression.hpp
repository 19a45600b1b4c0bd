#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>
#include <vector>

#include "dagforge/dataset.hpp"

namespace dagforge {

struct OlsFit {
    double intercept = 0.0;
    Eigen::VectorXd coef;  // one entry per predictor, in the order given
    double ssr = 0.0;      // residual sum of squares, clamped at 0
};

namespace detail {

// Gather the Gram submatrix for [1 | X_predictors] and the cross-products
// with the target column. Index 0 is always the intercept.
inline void gram_subproblem(const GramInfo& info, int target, const std::vector<int>& predictors,
                            Eigen::MatrixXd& gs, Eigen::VectorXd& b) {
    const Eigen::Index p = static_cast<Eigen::Index>(predictors.size());
    gs.resize(p + 1, p + 1);
    b.resize(p + 1);
    gs(0, 0) = info.gram(0, 0);
    b(0) = info.gram(0, target + 1);
    for (Eigen::Index a = 0; a < p; ++a) {
        const int ca = predictors[static_cast<std::size_t>(a)] + 1;
        gs(0, a + 1) = info.gram(0, ca);
        gs(a + 1, 0) = info.gram(ca, 0);
        b(a + 1) = info.gram(ca, target + 1);
        for (Eigen::Index c = 0; c <= a; ++c) {
            const int cc = predictors[static_cast<std::size_t>(c)] + 1;
            gs(a + 1, c + 1) = info.gram(ca, cc);
            gs(c + 1, a + 1) = info.gram(cc, ca);
        }
    }
}

}  // namespace detail

// Least squares of one column on a set of other columns, intercept included,
// solved on the cached Gram matrix: beta = (D^T D)^{-1} D^T y with D = [1|X_S].
// Rank-deficient designs fall back to the minimum-norm solution via a complete
// orthogonal decomposition of the Gram matrix — pinv(D^T D) D^T y equals
// pinv(D) y, so the fallback agrees with what a decomposition of D itself
// would return. SSR comes from y^T y - beta^T (D^T y) and is clamped at zero
// against rounding.
inline OlsFit ols_fit(const Dataset& ds, int target, const std::vector<int>& predictors) {
    const int d = ds.variable_count();
    if (target < 0 || target >= d) throw std::invalid_argument("ols_fit: target out of range");
    for (int pcol : predictors) {
        if (pcol < 0 || pcol >= d) throw std::invalid_argument("ols_fit: predictor out of range");
        if (pcol == target) throw std::invalid_argument("ols_fit: target cannot predict itself");
    }
    const GramInfo& info = ds.gram();
    const double n = info.gram(0, 0);
    const double yty = info.gram(target + 1, target + 1);

    OlsFit fit;
    if (predictors.empty()) {
        fit.intercept = info.gram(0, target + 1) / n;
        fit.coef.resize(0);
        fit.ssr = std::max(0.0, yty - n * fit.intercept * fit.intercept);
        return fit;
    }

    Eigen::MatrixXd gs;
    Eigen::VectorXd b;
    detail::gram_subproblem(info, target, predictors, gs, b);

    Eigen::LDLT<Eigen::MatrixXd> ldlt(gs);
    Eigen::VectorXd beta;
    bool ok = ldlt.info() == Eigen::Success;
    if (ok) {
        beta = ldlt.solve(b);
        // LDLT happily "solves" singular systems; check the result actually
        // satisfies the normal equations before trusting it.
        const double resid = (gs * beta - b).norm();
        ok = resid <= 1e-8 * (1.0 + b.norm());
    }
    if (!ok) {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gs);
        beta = cod.solve(b);
    }

    fit.intercept = beta(0);
    fit.coef = beta.tail(beta.size() - 1);
    fit.ssr = std::max(0.0, yty - beta.dot(b));
    return fit;
}

// Sample partial correlation of columns i and j given a conditioning set:
// regress each on the set (with intercept), correlate the residuals. A zero
// residual norm on either side means the variable is a linear function of the
// conditioning set; report 1 so callers treat the pair as dependent rather
// than dividing by zero. Rounding can push the raw value past ±1 — returned
// unclamped so callers can detect collinearity via |r| >= 1.
inline double partial_correlation(const Dataset& ds, int i, int j, const std::vector<int>& given) {
    if (i == j) throw std::invalid_argument("partial_correlation: i and j must differ");
    for (int c : given)
        if (c == i || c == j)
            throw std::invalid_argument("partial_correlation: conditioning set overlaps the pair");
    const Eigen::MatrixXd& x = ds.data();
    const OlsFit fi = ols_fit(ds, i, given);
    const OlsFit fj = ols_fit(ds, j, given);

    Eigen::VectorXd ri = x.col(i).array() - fi.intercept;
    Eigen::VectorXd rj = x.col(j).array() - fj.intercept;
    for (std::size_t a = 0; a < given.size(); ++a) {
        ri -= fi.coef(static_cast<Eigen::Index>(a)) * x.col(given[a]);
        rj -= fj.coef(static_cast<Eigen::Index>(a)) * x.col(given[a]);
    }
    // Residuals from an intercept fit are already centered.
    const double den = ri.norm() * rj.norm();
    if (den == 0.0) return 1.0;
    return ri.dot(rj) / den;
}

}  // namespace dagforge
