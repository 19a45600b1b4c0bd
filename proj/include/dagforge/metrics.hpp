#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dagforge/dag.hpp"
#include "dagforge/dataset.hpp"
#include "dagforge/regression.hpp"

namespace dagforge {

// Edge-level comparison of a predicted DAG against the truth. Optional fields
// are ratios whose denominator can legitimately be zero: fdr needs predicted
// edges, tpr needs true edges, the skeleton trio needs their respective
// supports. They serialize as null rather than pretending 0/0 is a number.
struct EvalResult {
    int predicted = 0;
    int correct = 0;
    int reversed = 0;
    int extra = 0;
    int missing = 0;
    int shd = 0;
    std::optional<double> fdr;
    std::optional<double> tpr;
    std::optional<double> skeleton_precision;
    std::optional<double> skeleton_recall;
    std::optional<double> skeleton_f1;
};

// Counts are per unordered pair: an edge predicted against the true direction
// is one reversal (not an extra plus a missing), so SHD = missing + extra +
// reversed is the minimal number of single-edge fixes. FDR counts reversals
// as false discoveries.
inline EvalResult evaluate(const Dag& predicted, const Dag& truth) {
    if (predicted.node_count != truth.node_count)
        throw std::invalid_argument("evaluate: node-count mismatch");
    const int d = truth.node_count;

    EvalResult r;
    int truth_edges = 0;
    int skel_pred = 0, skel_true = 0, skel_correct = 0;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            const bool p_ij = predicted.adj(i, j) != 0, p_ji = predicted.adj(j, i) != 0;
            const bool t_ij = truth.adj(i, j) != 0, t_ji = truth.adj(j, i) != 0;
            const bool p_adj = p_ij || p_ji, t_adj = t_ij || t_ji;
            r.predicted += p_ij + p_ji;
            truth_edges += t_ij + t_ji;
            skel_pred += p_adj;
            skel_true += t_adj;
            skel_correct += p_adj && t_adj;
            if (p_adj && t_adj) {
                if (p_ij == t_ij && p_ji == t_ji)
                    ++r.correct;
                else
                    ++r.reversed;
            } else if (p_adj) {
                ++r.extra;
            } else if (t_adj) {
                ++r.missing;
            }
        }
    r.shd = r.missing + r.extra + r.reversed;
    if (r.predicted > 0) r.fdr = static_cast<double>(r.reversed + r.extra) / r.predicted;
    if (truth_edges > 0) r.tpr = static_cast<double>(r.correct) / truth_edges;
    if (skel_pred > 0) r.skeleton_precision = static_cast<double>(skel_correct) / skel_pred;
    if (skel_true > 0) r.skeleton_recall = static_cast<double>(skel_correct) / skel_true;
    if (r.skeleton_precision && r.skeleton_recall &&
        (*r.skeleton_precision + *r.skeleton_recall) > 0.0)
        r.skeleton_f1 = 2.0 * *r.skeleton_precision * *r.skeleton_recall /
                        (*r.skeleton_precision + *r.skeleton_recall);
    return r;
}

// Variance-sortability diagnostic, walking the k-th powers of the adjacency
// matrix. The denominator accumulates the number of length-k paths; the
// numerator asks once per (source, target, length) cell whether
// count * Var(target) / Var(source) exceeds one, ties within tol scoring
// half. This reproduces the reference implementation's arithmetic (boolean
// adjacency upcast to integer path counts under the matrix product) rather
// than a self-consistent per-path fraction, and the mismatch is kept
// deliberately: it is what gives the diagnostic its familiar behavior on
// dense graphs, where high-multiplicity long paths swamp the denominator and
// drive readings toward zero even when every individual variance pair is
// well ordered. A self-consistent weighting stays near 1.0 at any density on
// raw linear-Gaussian data and would make cross-density readings useless for
// comparison against reported figures. Returns nothing when the graph has no
// path at all. Counts are accumulated in doubles and capped to stay finite.
inline std::optional<double> varsortability(const Dag& truth, const Dataset& data,
                                            double tol = 1e-9) {
    if (truth.node_count != data.variable_count())
        throw std::invalid_argument("varsortability: dimension mismatch");
    const int d = truth.node_count;
    const double n = static_cast<double>(data.sample_count());

    Eigen::VectorXd var(d);
    for (int j = 0; j < d; ++j) {
        const Eigen::VectorXd col = data.data().col(j);
        const double mean = col.mean();
        var(j) = (col.array() - mean).square().sum() / n;
    }

    const Eigen::MatrixXd e = truth.adj.cast<double>();
    Eigen::MatrixXd paths = e;  // paths(i, j) = number of length-k paths i -> j
    double ordered = 0.0, total = 0.0;
    for (int k = 1; k <= d - 1; ++k) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const double c = paths(i, j);
                if (c == 0.0) continue;
                total += c;
                const double scaled = c * var(j) / var(i);
                if (scaled > 1.0 + tol)
                    ordered += 1.0;
                else if (scaled > 1.0 - tol)
                    ordered += 0.5;
            }
        if (k < d - 1) {
            paths = paths * e;
            paths = paths.cwiseMin(1e300);  // saturate rather than overflow to inf
        }
    }
    if (total == 0.0) return std::nullopt;
    return ordered / total;
}

inline std::optional<double> varsortability(const WeightedGraph& truth, const Dataset& data,
                                            double tol = 1e-9) {
    return varsortability(truth.structure(), data, tol);
}

enum class SortDirection { Increasing, Decreasing };

// The variance-ordering baseline: sort nodes by marginal variance, regress
// each node on all of its predecessors in that order, keep coefficients with
// magnitude >= delta. Trivially acyclic since edges follow the order. Exists
// to quantify how much of a benchmark a variance-sorted heuristic already
// solves (and, in the decreasing direction, how badly it can do).
inline Dag sortnregress(const Dataset& data, SortDirection direction, double delta = 0.3) {
    const int d = data.variable_count();
    const double n = static_cast<double>(data.sample_count());

    Eigen::VectorXd var(d);
    for (int j = 0; j < d; ++j) {
        const Eigen::VectorXd col = data.data().col(j);
        const double mean = col.mean();
        var(j) = (col.array() - mean).square().sum() / n;
    }

    std::vector<int> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return direction == SortDirection::Increasing ? var(a) < var(b) : var(a) > var(b);
    });

    Dag g(d);
    std::vector<int> preds;
    for (std::size_t t = 1; t < order.size(); ++t) {
        const int node = order[t];
        preds.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(t));
        const OlsFit fit = ols_fit(data, node, preds);
        for (std::size_t a = 0; a < preds.size(); ++a)
            if (std::abs(fit.coef(static_cast<Eigen::Index>(a))) >= delta)
                g.adj(preds[a], node) = 1;
    }
    return g;
}

}  // namespace dagforge
