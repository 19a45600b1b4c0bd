#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dagforge/common.hpp"
#include "dagforge/dag.hpp"
#include "dagforge/dataset.hpp"
#include "dagforge/gp.hpp"

namespace dagforge {

enum class GraphModel { ER, SF };

struct GraphSpec {
    int d = 10;
    GraphModel model = GraphModel::ER;
    int k = 2;  // expected in-degree (ER) / out-edges per arriving node (SF)
};

// Union of closed intervals sampled uniformly by length: one draw lands in
// [0, total length) and is mapped into the interval it falls in, so each
// interval is picked with probability proportional to its width.
struct IntervalUnion {
    std::vector<std::pair<double, double>> intervals;

    static IntervalUnion regular() { return {{{-2.0, -0.5}, {0.5, 2.0}}}; }
    static IntervalUnion wide() { return {{{-5.0, -2.0}, {2.0, 5.0}}}; }

    double sample(Rng& rng) const {
        if (intervals.empty()) throw std::invalid_argument("IntervalUnion: no intervals");
        double total = 0.0;
        for (const auto& [lo, hi] : intervals) {
            if (hi < lo) throw std::invalid_argument("IntervalUnion: interval upper < lower");
            total += hi - lo;
        }
        if (total == 0.0) return intervals.front().first;
        std::uniform_real_distribution<double> u(0.0, total);
        double pos = u(rng);
        for (const auto& [lo, hi] : intervals) {
            const double len = hi - lo;
            if (pos < len) return lo + pos;
            pos -= len;
        }
        return intervals.back().second;  // pos == total after rounding
    }
};

enum class NoiseKind { Gauss, Exp, Gumbel, Laplace, Uniform };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::Gauss;
    double variance = 1.0;  // Gauss only; the other families are parameter-free
    // Gauss only: when set, each node gets its own variance drawn uniformly
    // from this range, giving non-equal-variance data.
    std::optional<std::pair<double, double>> variance_range;
};

enum class Mechanism { Linear, Gp, Mlp, PnlGp };

struct SemSpec {
    Mechanism mechanism = Mechanism::Linear;
    IntervalUnion weight_range = IntervalUnion::regular();
    NoiseSpec noise;
    long n = 1000;
    bool standardize = false;
};

// Joint GP sampling factorizes an n x n kernel per node; past this point the
// cubic cost stops being a desk-scale operation.
inline constexpr long kGpSampleLimit = 2000;
inline constexpr int kMlpHiddenUnits = 100;

// Random DAG. ER: draw a uniform random node ordering and include each
// forward pair independently with probability 2k/(d-1), giving expected total
// edge count k*d. SF: Barabasi-Albert arrival process — each new node sends
// min(k, #existing) edges to distinct earlier nodes picked proportionally to
// degree+1 — followed by a random relabeling so that node indices carry no
// arrival information. Both are acyclic by construction.
inline Dag gen_graph(const GraphSpec& spec, Rng& rng) {
    const int d = spec.d;
    if (d < 1) throw std::invalid_argument("gen_graph: d must be >= 1");
    if (spec.k < 1) throw std::invalid_argument("gen_graph: k must be >= 1");

    std::vector<int> label(static_cast<std::size_t>(d));
    std::iota(label.begin(), label.end(), 0);
    std::shuffle(label.begin(), label.end(), rng);

    Dag g(d);
    if (spec.model == GraphModel::ER) {
        if (d < 2) return g;
        const double p = 2.0 * spec.k / (d - 1);
        if (p > 1.0)
            throw std::invalid_argument("gen_graph: ER edge probability 2k/(d-1) = " +
                                        std::to_string(p) + " exceeds 1; lower k");
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                if (u(rng) <= p) g.adj(label[i], label[j]) = 1;
        return g;
    }

    // SF: grow on arrival indices, then relabel.
    std::vector<int> degree(static_cast<std::size_t>(d), 0);
    Eigen::MatrixXi arrival = Eigen::MatrixXi::Zero(d, d);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 1; t < d; ++t) {
        const int m = std::min(spec.k, t);
        std::vector<int> chosen;
        for (int pick = 0; pick < m; ++pick) {
            double total = 0.0;
            for (int c = 0; c < t; ++c)
                if (arrival(t, c) == 0) total += degree[c] + 1.0;
            double pos = u(rng) * total;
            int target = -1;
            for (int c = 0; c < t; ++c) {
                if (arrival(t, c) != 0) continue;
                pos -= degree[c] + 1.0;
                if (pos <= 0.0) {
                    target = c;
                    break;
                }
            }
            if (target < 0) {  // rounding spill: last eligible node
                for (int c = t - 1; c >= 0; --c)
                    if (arrival(t, c) == 0) {
                        target = c;
                        break;
                    }
            }
            arrival(t, target) = 1;
            chosen.push_back(target);
        }
        for (int c : chosen) ++degree[c];
        degree[t] += m;
    }
    for (int t = 0; t < d; ++t)
        for (int c = 0; c < d; ++c)
            if (arrival(t, c) != 0) g.adj(label[t], label[c]) = 1;
    return g;
}

// Independent uniform weight per edge from the interval union; zeros elsewhere.
inline WeightedGraph gen_weights(const Dag& g, const IntervalUnion& range, Rng& rng) {
    WeightedGraph w;
    w.node_count = g.node_count;
    w.weights = Eigen::MatrixXd::Zero(g.node_count, g.node_count);
    for (int i = 0; i < g.node_count; ++i)
        for (int j = 0; j < g.node_count; ++j)
            if (g.adj(i, j) != 0) w.weights(i, j) = range.sample(rng);
    return w;
}

namespace detail {

inline double sample_noise(NoiseKind kind, double sigma, Rng& rng) {
    switch (kind) {
        case NoiseKind::Gauss: {
            if (sigma == 0.0) return 0.0;
            std::normal_distribution<double> dist(0.0, sigma);
            return dist(rng);
        }
        case NoiseKind::Exp: {
            std::exponential_distribution<double> dist(1.0);
            return dist(rng);
        }
        case NoiseKind::Gumbel: {
            std::extreme_value_distribution<double> dist(0.0, 1.0);
            return dist(rng);
        }
        case NoiseKind::Laplace: {
            // Difference of two unit exponentials is Laplace(0, 1).
            std::exponential_distribution<double> dist(1.0);
            const double a = dist(rng);
            const double b = dist(rng);
            return a - b;
        }
        case NoiseKind::Uniform: {
            std::uniform_real_distribution<double> dist(-1.0, 1.0);
            return dist(rng);
        }
    }
    throw std::logic_error("sample_noise: unreachable");
}

inline Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& x, const std::vector<int>& cols) {
    Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t a = 0; a < cols.size(); ++a)
        out.col(static_cast<Eigen::Index>(a)) = x.col(cols[a]);
    return out;
}

}  // namespace detail

// Draw n samples from the structural model: nodes are filled in topological
// order, each column being mechanism(parent columns) plus its noise. Noise
// families: Gauss uses the configured variance (or one variance per node
// drawn from the configured range); the others are the standard unit-scale
// laws. Mechanisms: Linear multiplies by edge weights; Gp adds one joint GP
// function draw (unit bandwidth) over the realized parent rows; Mlp pushes
// parents through a random one-hidden-layer sigmoid network (weights from the
// regular interval union, no biases); PnlGp is sigmoid(GP draw + Laplace) —
// its noise is built in, so the configured family is ignored. Roots skip the
// mechanism: noise only (PnlGp roots: sigmoid(Laplace)). With standardize,
// every column is centered and divided by its sample standard deviation
// (n-1 denominator) at the end; exactly constant columns are only centered.
inline Dataset simulate(const WeightedGraph& wg, const SemSpec& sem, Rng& rng) {
    const int d = wg.node_count;
    const long n = sem.n;
    if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
    const Dag g = wg.structure();
    const std::vector<int> order = topological_order(g);
    const bool gp_based = sem.mechanism == Mechanism::Gp || sem.mechanism == Mechanism::PnlGp;
    if (gp_based && n > kGpSampleLimit)
        throw std::invalid_argument("simulate: GP mechanisms draw a joint n x n kernel; n <= " +
                                    std::to_string(kGpSampleLimit) + " required");

    Eigen::VectorXd sigma(d);
    if (sem.noise.kind == NoiseKind::Gauss && sem.noise.variance_range) {
        const auto [lo, hi] = *sem.noise.variance_range;
        if (lo < 0.0 || hi < lo)
            throw std::invalid_argument("simulate: bad noise variance range");
        std::uniform_real_distribution<double> u(lo, hi);
        for (int i = 0; i < d; ++i) sigma(i) = std::sqrt(u(rng));
    } else {
        if (sem.noise.variance < 0.0)
            throw std::invalid_argument("simulate: negative noise variance");
        sigma.setConstant(std::sqrt(sem.noise.variance));
    }

    Eigen::MatrixXd x(n, d);
    std::vector<int> parents;
    for (int node : order) {
        parents.clear();
        for (int j = 0; j < d; ++j)
            if (g.adj(j, node) != 0) parents.push_back(j);

        Eigen::VectorXd signal = Eigen::VectorXd::Zero(n);
        if (!parents.empty()) {
            switch (sem.mechanism) {
                case Mechanism::Linear:
                    for (int p : parents) signal += wg.weights(p, node) * x.col(p);
                    break;
                case Mechanism::Gp:
                case Mechanism::PnlGp:
                    signal = gp_sample_function(detail::gather_columns(x, parents), 1.0, rng);
                    break;
                case Mechanism::Mlp: {
                    const Eigen::Index p = static_cast<Eigen::Index>(parents.size());
                    const IntervalUnion mlp_range = IntervalUnion::regular();
                    Eigen::MatrixXd w1(kMlpHiddenUnits, p);
                    for (Eigen::Index r = 0; r < w1.rows(); ++r)
                        for (Eigen::Index c = 0; c < p; ++c) w1(r, c) = mlp_range.sample(rng);
                    Eigen::VectorXd w2(kMlpHiddenUnits);
                    for (Eigen::Index r = 0; r < w2.size(); ++r) w2(r) = mlp_range.sample(rng);
                    const Eigen::MatrixXd hidden =
                        (detail::gather_columns(x, parents) * w1.transpose()).array().logistic();
                    signal = hidden * w2;
                    break;
                }
            }
        }

        if (sem.mechanism == Mechanism::PnlGp) {
            for (long s = 0; s < n; ++s) {
                const double e = detail::sample_noise(NoiseKind::Laplace, 1.0, rng);
                x(s, node) = 1.0 / (1.0 + std::exp(-(signal(s) + e)));
            }
        } else {
            for (long s = 0; s < n; ++s)
                x(s, node) = signal(s) + detail::sample_noise(sem.noise.kind, sigma(node), rng);
        }
        if (!x.col(node).allFinite())
            throw NumericError("simulate: mechanism diverged at node " + std::to_string(node));
    }

    if (sem.standardize) {
        for (int j = 0; j < d; ++j) {
            const double mean = x.col(j).mean();
            x.col(j).array() -= mean;
            if (n > 1) {
                const double sd = std::sqrt(x.col(j).squaredNorm() / static_cast<double>(n - 1));
                if (sd > 0.0) x.col(j) /= sd;
            }
        }
    }
    return Dataset(std::move(x));
}

// Structure-only entry point: linear mechanisms draw their weights here (from
// sem.weight_range); the nonlinear ones never had any.
inline Dataset simulate(const Dag& g, const SemSpec& sem, Rng& rng) {
    if (sem.mechanism == Mechanism::Linear) {
        const WeightedGraph wg = gen_weights(g, sem.weight_range, rng);
        return simulate(wg, sem, rng);
    }
    WeightedGraph wg;
    wg.node_count = g.node_count;
    wg.weights = g.adj.cast<double>();
    return simulate(wg, sem, rng);
}

struct GeneratedData {
    Dataset data;
    Dag graph;
    WeightedGraph weights;  // meaningful for Linear; zero-pattern cast otherwise
};

// Graph, weights, and samples from one seed, in one call.
inline GeneratedData generate_dataset(const GraphSpec& gspec, const SemSpec& sem,
                                      std::uint64_t seed) {
    Rng rng = make_rng(seed);
    GeneratedData out;
    out.graph = gen_graph(gspec, rng);
    if (sem.mechanism == Mechanism::Linear) {
        out.weights = gen_weights(out.graph, sem.weight_range, rng);
    } else {
        out.weights.node_count = out.graph.node_count;
        out.weights.weights = out.graph.adj.cast<double>();
    }
    out.data = simulate(out.weights, sem, rng);
    return out;
}

// Perturb exactly round(percent/100 * n * d) distinct entries with additive
// N(0, sigma2) noise. Entry selection is a partial Fisher-Yates over flat
// indices, so every subset of the right size is equally likely.
inline Dataset corrupt(const Dataset& data, double percent, double sigma2, Rng& rng) {
    if (percent < 0.0 || percent > 100.0)
        throw std::invalid_argument("corrupt: percent must lie in [0, 100]");
    if (sigma2 < 0.0) throw std::invalid_argument("corrupt: sigma2 must be >= 0");
    Eigen::MatrixXd x = data.data();
    const long total = static_cast<long>(x.size());
    const long hits = std::lround(percent / 100.0 * static_cast<double>(total));

    std::vector<long> idx(static_cast<std::size_t>(total));
    std::iota(idx.begin(), idx.end(), 0L);
    const double sigma = std::sqrt(sigma2);
    for (long t = 0; t < hits; ++t) {
        std::uniform_int_distribution<long> pick(t, total - 1);
        std::swap(idx[static_cast<std::size_t>(t)], idx[static_cast<std::size_t>(pick(rng))]);
        const long flat = idx[static_cast<std::size_t>(t)];
        x(flat % x.rows(), flat / x.rows()) += detail::sample_noise(NoiseKind::Gauss, sigma, rng);
    }
    return Dataset(std::move(x));
}

struct ConfoundedData {
    Dataset data;
    Dag truth;       // induced subgraph on the kept nodes
    Dag full_graph;  // the (d + extra)-node graph actually simulated
    std::vector<int> dropped;  // full-graph indices of the removed nodes, ascending
};

// Simulate on d + extra nodes, then delete `extra` columns, preferring nodes
// with at least two children (deleting those actually induces confounding
// between the orphaned siblings); remaining removals fall back to uniform.
// The returned truth is what a method only seeing the kept columns should be
// judged against.
inline ConfoundedData with_hidden_confounders(const GraphSpec& spec, const SemSpec& sem,
                                              int extra, Rng& rng) {
    if (extra < 0) throw std::invalid_argument("with_hidden_confounders: extra must be >= 0");
    GraphSpec full_spec = spec;
    full_spec.d = spec.d + extra;

    ConfoundedData out;
    out.full_graph = gen_graph(full_spec, rng);
    Dataset full_data = simulate(out.full_graph, sem, rng);

    const int full_d = full_spec.d;
    std::vector<int> confounders, others;
    for (int i = 0; i < full_d; ++i)
        (out.full_graph.children(i).size() >= 2 ? confounders : others).push_back(i);

    std::vector<bool> drop(static_cast<std::size_t>(full_d), false);
    auto take_from = [&](std::vector<int>& pool) {
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        const std::size_t at = pick(rng);
        const int node = pool[at];
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(at));
        drop[static_cast<std::size_t>(node)] = true;
    };
    for (int t = 0; t < extra; ++t) take_from(confounders.empty() ? others : confounders);

    std::vector<int> kept;
    for (int i = 0; i < full_d; ++i)
        (drop[static_cast<std::size_t>(i)] ? out.dropped : kept).push_back(i);

    Eigen::MatrixXd x(full_data.sample_count(), spec.d);
    for (std::size_t a = 0; a < kept.size(); ++a)
        x.col(static_cast<Eigen::Index>(a)) = full_data.data().col(kept[a]);
    out.data = Dataset(std::move(x));

    out.truth = Dag(spec.d);
    for (std::size_t a = 0; a < kept.size(); ++a)
        for (std::size_t b = 0; b < kept.size(); ++b)
            out.truth.adj(static_cast<int>(a), static_cast<int>(b)) =
                out.full_graph.adj(kept[a], kept[b]);
    return out;
}

}  // namespace dagforge
