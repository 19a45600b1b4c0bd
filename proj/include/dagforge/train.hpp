#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dagforge/common.hpp"
#include "dagforge/dag.hpp"
#include "dagforge/dataset.hpp"
#include "dagforge/metrics.hpp"
#include "dagforge/policy.hpp"
#include "dagforge/scoring.hpp"
#include "dagforge/vec2dag.hpp"

namespace dagforge {

enum class Algo { VPG, A2C, PPO };

struct PpoConfig {
    double clip = 0.2;
    int epochs = 10;
    int minibatch = 64;
};

struct TrainConfig {
    int batch_size = 64;
    long total_steps = 20000;
    Algo algorithm = Algo::PPO;
    // Unset -> 3e-4 for PPO, 7e-4 for A2C and VPG.
    std::optional<double> learning_rate;
    double entropy_coef = 0.0;
    bool advantage_normalization = true;
    bool vpg_baseline = true;  // subtract the batch-mean reward in VPG
    PpoConfig ppo;
    double vf_coef = 0.5;
    double gamma_clip = 10.0;
    double max_grad_norm = 0.5;
    std::uint64_t seed = 0;
    // Stop after this many steps without a new best reward; 0 disables.
    long patience = 0;
    // When set, the trace carries the SHD of the best DAG so far against this.
    const Dag* truth = nullptr;
};

struct TraceRow {
    long step = 0;
    double mean_reward = 0.0;
    double best_reward = 0.0;
    // SHD of the best DAG so far vs cfg.truth; NaN when no truth was given.
    double best_shd = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
    PolicyParams params;
    Dag best_dag;
    double best_reward = -std::numeric_limits<double>::infinity();
    std::vector<TraceRow> trace;
};

inline double resolve_learning_rate(const TrainConfig& cfg) {
    if (cfg.learning_rate) return *cfg.learning_rate;
    return cfg.algorithm == Algo::PPO ? 3e-4 : 7e-4;
}

// Clipped-surrogate objective (to be MAXIMIZED) for one batch at params_new:
//   mean_b min(rho_b A_b, clip(rho_b, 1-c, 1+c) A_b),  rho_b = exp(lp_new - lp_old).
// Optionally accumulates its gradient in (mu, log_sigma). Per sample the
// gradient flows through the unclipped branch exactly when that branch attains
// the min (ties included); otherwise the clipped branch is flat and
// contributes nothing. Exposed separately so the gradient can be checked
// against finite differences.
inline double ppo_surrogate(const PolicyParams& params_new, const Eigen::MatrixXd& z_pre_clamp,
                            const Eigen::VectorXd& old_log_probs, const Eigen::VectorXd& advantages,
                            double clip, Eigen::VectorXd* grad_mu = nullptr,
                            Eigen::VectorXd* grad_log_sigma = nullptr) {
    const Eigen::Index m = z_pre_clamp.rows();
    const Eigen::Index dim = params_new.dim();
    if (old_log_probs.size() != m || advantages.size() != m)
        throw std::invalid_argument("ppo_surrogate: batch size mismatch");
    if (grad_mu) grad_mu->setZero(dim);
    if (grad_log_sigma) grad_log_sigma->setZero(dim);

    double total = 0.0;
    Eigen::VectorXd gmu(dim), gls(dim);
    for (Eigen::Index b = 0; b < m; ++b) {
        const Eigen::VectorXd z = z_pre_clamp.row(b);
        const double lp_new = log_prob(params_new, z);
        const double rho = std::exp(lp_new - old_log_probs(b));
        const double a = advantages(b);
        const double unclipped = rho * a;
        const double clipped = std::clamp(rho, 1.0 - clip, 1.0 + clip) * a;
        total += std::min(unclipped, clipped);
        if (grad_mu && unclipped <= clipped) {
            log_prob_grad(params_new, z, gmu, gls);
            grad_mu->noalias() += (unclipped / static_cast<double>(m)) * gmu;
            grad_log_sigma->noalias() += (unclipped / static_cast<double>(m)) * gls;
        }
    }
    return total / static_cast<double>(m);
}

namespace detail {

struct StepEval {
    ActionBatch batch;
    Eigen::VectorXd rewards;
    double mean_reward = 0.0;
};

// Draw a batch, score every action, and fold improvements into the running
// best. Rewards are gathered positionally, so a later parallel evaluation
// cannot change results; ties keep the earliest DAG.
inline StepEval evaluate_step(const Dataset& ds, const PolicyParams& params, int batch_size,
                              const ScoreConfig& score_cfg, ScoreCache* cache, Rng& rng,
                              TrainResult& out) {
    StepEval ev;
    ev.batch = sample_actions(params, batch_size, rng);
    ev.rewards.resize(batch_size);
    const int d = ds.variable_count();
    for (int k = 0; k < batch_size; ++k) {
        const PotentialVec z{d, ev.batch.actions.row(k).transpose()};
        ev.rewards(k) = reward(ds, z, score_cfg, cache);
        if (ev.rewards(k) > out.best_reward) {
            out.best_reward = ev.rewards(k);
            out.best_dag = vec_to_dag(z);
        }
    }
    ev.mean_reward = ev.rewards.mean();
    return ev;
}

inline void push_trace(TrainResult& out, long step, double mean_reward, const TrainConfig& cfg) {
    TraceRow row;
    row.step = step;
    row.mean_reward = mean_reward;
    row.best_reward = out.best_reward;
    if (cfg.truth != nullptr && out.best_dag.node_count == cfg.truth->node_count)
        row.best_shd = static_cast<double>(evaluate(out.best_dag, *cfg.truth).shd);
    out.trace.push_back(row);
}

// Mean 0, unit sample standard deviation (n-1 denominator), epsilon-guarded.
// Batches of size 1 come back as all zeros rather than dividing by nothing.
inline void normalize_advantages(Eigen::VectorXd& adv) {
    const Eigen::Index n = adv.size();
    adv.array() -= adv.mean();
    double sd = 0.0;
    if (n > 1) sd = std::sqrt(adv.squaredNorm() / static_cast<double>(n - 1));
    adv /= (sd + 1e-8);
}

inline void clip_grad_norm(Eigen::VectorXd& grad, double max_norm) {
    const double norm = grad.norm();
    if (norm > max_norm && norm > 0.0) grad *= max_norm / norm;
}

}  // namespace detail

// Algorithm-1 policy gradient: theta += lr * mean_b grad log pi(z_b) * (r_b - baseline),
// plain SGD ascent. The baseline is the batch-mean reward (a variance
// reduction the bare algorithm lacks); cfg.vpg_baseline turns it off.
inline TrainResult train_vpg(const Dataset& ds, const TrainConfig& cfg,
                             const ScoreConfig& score_cfg, ScoreCache* cache = nullptr) {
    const int d = ds.variable_count();
    const Eigen::Index dim = PotentialVec::dim_for(d);
    const double lr = resolve_learning_rate(cfg);
    ScoreCache local_cache;
    if (cache == nullptr) cache = &local_cache;
    Rng rng = make_rng(cfg.seed);

    TrainResult out;
    out.params = PolicyParams::init(dim, cfg.gamma_clip);
    out.best_dag = Dag(d);

    Eigen::VectorXd gmu(dim), gls(dim), acc_mu(dim), acc_ls(dim);
    long since_best = 0;
    for (long step = 1; step <= cfg.total_steps; ++step) {
        const double prev_best = out.best_reward;
        const auto ev = detail::evaluate_step(ds, out.params, cfg.batch_size, score_cfg, cache,
                                              rng, out);
        const double baseline = cfg.vpg_baseline ? ev.mean_reward : 0.0;
        acc_mu.setZero();
        acc_ls.setZero();
        for (int k = 0; k < cfg.batch_size; ++k) {
            log_prob_grad(out.params, ev.batch.pre_clamp.row(k).transpose(), gmu, gls);
            const double w = (ev.rewards(k) - baseline) / cfg.batch_size;
            acc_mu.noalias() += w * gmu;
            acc_ls.noalias() += w * gls;
        }
        if (cfg.entropy_coef != 0.0) acc_ls.array() += cfg.entropy_coef;
        out.params.mu += lr * acc_mu;
        out.params.log_sigma += lr * acc_ls;
        if (!out.params.mu.allFinite() || !out.params.log_sigma.allFinite())
            throw NumericError("train_vpg: policy parameters diverged at step " +
                               std::to_string(step));
        detail::push_trace(out, step, ev.mean_reward, cfg);
        since_best = out.best_reward > prev_best ? 0 : since_best + 1;
        if (cfg.patience > 0 && since_best >= cfg.patience) break;
    }
    return out;
}

// Advantage actor-critic collapsed to the one-step stateless setting: the
// critic is a single scalar v fit to the batch rewards by squared error, and
// each step does one joint Adam update of (mu, log_sigma, v) on
//   -mean(A * log pi) + vf_coef * mean((v - r)^2) - entropy_coef * H.
// Advantages use v as it stood when the batch was drawn.
inline TrainResult train_a2c(const Dataset& ds, const TrainConfig& cfg,
                             const ScoreConfig& score_cfg, ScoreCache* cache = nullptr) {
    const int d = ds.variable_count();
    const Eigen::Index dim = PotentialVec::dim_for(d);
    ScoreCache local_cache;
    if (cache == nullptr) cache = &local_cache;
    Rng rng = make_rng(cfg.seed);

    TrainResult out;
    out.params = PolicyParams::init(dim, cfg.gamma_clip);
    out.best_dag = Dag(d);

    // theta = [mu | log_sigma | v]
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(2 * dim + 1);
    AdamState adam = AdamState::init(theta.size(), resolve_learning_rate(cfg));
    Eigen::VectorXd grad(theta.size()), gmu(dim), gls(dim);

    long since_best = 0;
    for (long step = 1; step <= cfg.total_steps; ++step) {
        const double prev_best = out.best_reward;
        out.params.mu = theta.head(dim);
        out.params.log_sigma = theta.segment(dim, dim);
        const double v = theta(2 * dim);
        const auto ev = detail::evaluate_step(ds, out.params, cfg.batch_size, score_cfg, cache,
                                              rng, out);

        Eigen::VectorXd adv = ev.rewards.array() - v;
        if (cfg.advantage_normalization) detail::normalize_advantages(adv);

        grad.setZero();
        for (int k = 0; k < cfg.batch_size; ++k) {
            log_prob_grad(out.params, ev.batch.pre_clamp.row(k).transpose(), gmu, gls);
            const double w = -adv(k) / cfg.batch_size;
            grad.head(dim).noalias() += w * gmu;
            grad.segment(dim, dim).noalias() += w * gls;
        }
        grad.segment(dim, dim).array() -= cfg.entropy_coef;
        grad(2 * dim) = cfg.vf_coef * 2.0 * (v - ev.rewards.mean());
        detail::clip_grad_norm(grad, cfg.max_grad_norm);
        adam_step(adam, theta, grad);

        detail::push_trace(out, step, ev.mean_reward, cfg);
        since_best = out.best_reward > prev_best ? 0 : since_best + 1;
        if (cfg.patience > 0 && since_best >= cfg.patience) break;
    }
    out.params.mu = theta.head(dim);
    out.params.log_sigma = theta.segment(dim, dim);
    return out;
}

// Proximal policy optimization on the same one-step problem: per outer step,
// draw a batch under the current policy, fix advantages A = r - v (normalized
// when enabled), then run cfg.ppo.epochs passes of minibatch Adam updates on
//   -clipped_surrogate + vf_coef * mean((v - r)^2) - entropy_coef * H.
// The value scalar updates inside the epochs (live), the advantages do not.
inline TrainResult train_ppo(const Dataset& ds, const TrainConfig& cfg,
                             const ScoreConfig& score_cfg, ScoreCache* cache = nullptr) {
    const int d = ds.variable_count();
    const Eigen::Index dim = PotentialVec::dim_for(d);
    ScoreCache local_cache;
    if (cache == nullptr) cache = &local_cache;
    Rng rng = make_rng(cfg.seed);

    TrainResult out;
    out.params = PolicyParams::init(dim, cfg.gamma_clip);
    out.best_dag = Dag(d);

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(2 * dim + 1);
    AdamState adam = AdamState::init(theta.size(), resolve_learning_rate(cfg));
    Eigen::VectorXd grad(theta.size()), gmu(dim), gls(dim), smu(dim), sls(dim);

    const int mb = std::min(cfg.ppo.minibatch, cfg.batch_size);
    std::vector<int> order(static_cast<std::size_t>(cfg.batch_size));
    std::iota(order.begin(), order.end(), 0);

    long since_best = 0;
    for (long step = 1; step <= cfg.total_steps; ++step) {
        const double prev_best = out.best_reward;
        out.params.mu = theta.head(dim);
        out.params.log_sigma = theta.segment(dim, dim);
        const auto ev = detail::evaluate_step(ds, out.params, cfg.batch_size, score_cfg, cache,
                                              rng, out);

        Eigen::VectorXd old_lp(cfg.batch_size);
        for (int k = 0; k < cfg.batch_size; ++k)
            old_lp(k) = log_prob(out.params, ev.batch.pre_clamp.row(k).transpose());

        Eigen::VectorXd adv = ev.rewards.array() - theta(2 * dim);
        if (cfg.advantage_normalization) detail::normalize_advantages(adv);

        for (int epoch = 0; epoch < cfg.ppo.epochs; ++epoch) {
            // With one minibatch covering the batch the order cannot matter;
            // shuffling only when it does keeps RNG consumption identical
            // across minibatch settings that coincide.
            if (mb < cfg.batch_size) std::shuffle(order.begin(), order.end(), rng);
            for (int start = 0; start < cfg.batch_size; start += mb) {
                const int count = std::min(mb, cfg.batch_size - start);
                PolicyParams cur;
                cur.mu = theta.head(dim);
                cur.log_sigma = theta.segment(dim, dim);
                cur.gamma_clip = cfg.gamma_clip;
                const double v = theta(2 * dim);

                grad.setZero();
                double vdiff_sum = 0.0;
                for (int a = 0; a < count; ++a) {
                    const int k = order[static_cast<std::size_t>(start + a)];
                    const Eigen::VectorXd z = ev.batch.pre_clamp.row(k);
                    const double lp_new = log_prob(cur, z);
                    const double rho = std::exp(lp_new - old_lp(k));
                    const double unclipped = rho * adv(k);
                    const double clipped =
                        std::clamp(rho, 1.0 - cfg.ppo.clip, 1.0 + cfg.ppo.clip) * adv(k);
                    if (unclipped <= clipped) {
                        log_prob_grad(cur, z, gmu, gls);
                        const double w = -unclipped / count;  // minimize -surrogate
                        grad.head(dim).noalias() += w * gmu;
                        grad.segment(dim, dim).noalias() += w * gls;
                    }
                    vdiff_sum += v - ev.rewards(k);
                }
                grad.segment(dim, dim).array() -= cfg.entropy_coef;
                grad(2 * dim) = cfg.vf_coef * 2.0 * vdiff_sum / count;
                detail::clip_grad_norm(grad, cfg.max_grad_norm);
                adam_step(adam, theta, grad);
            }
        }

        detail::push_trace(out, step, ev.mean_reward, cfg);
        since_best = out.best_reward > prev_best ? 0 : since_best + 1;
        if (cfg.patience > 0 && since_best >= cfg.patience) break;
    }
    out.params.mu = theta.head(dim);
    out.params.log_sigma = theta.segment(dim, dim);
    return out;
}

inline TrainResult train(const Dataset& ds, const TrainConfig& cfg, const ScoreConfig& score_cfg,
                         ScoreCache* cache = nullptr) {
    switch (cfg.algorithm) {
        case Algo::VPG: return train_vpg(ds, cfg, score_cfg, cache);
        case Algo::A2C: return train_a2c(ds, cfg, score_cfg, cache);
        case Algo::PPO: return train_ppo(ds, cfg, score_cfg, cache);
    }
    throw std::logic_error("train: unreachable");
}

// ---------------------------------------------------------------------------
// Gradient-descent ablation: optimize z directly through a continuous
// relaxation instead of searching with a policy.

struct ContinuousStConfig {
    double lr = 1e-3;
    double lambda1 = 1e-7;  // L1 weight on z
    long max_iters = 20000;
    // Stop when the relative loss change across `plateau_window` iterations
    // drops below `plateau_rel_tol`.
    double plateau_rel_tol = 1e-6;
    int plateau_window = 100;
    double init_scale = 0.1;
    std::uint64_t seed = 0;
};

struct StResult {
    WeightedGraph graph;
    std::vector<double> loss_trace;
    Eigen::VectorXd z;
};

namespace detail {

// Continuous relaxation of the graph map: W = (E + E^T) .* H(p_j - p_i), the
// symmetrized edge potentials gated (not binarized) by the node-potential
// ordering, so W_ij doubles as a linear edge weight.
inline Eigen::MatrixXd st_weights(const Eigen::VectorXd& z, int d) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
    Eigen::Index idx = d;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j, ++idx) {
            const double e = z(idx);
            if (z(i) < z(j))
                w(i, j) = e;
            else if (z(j) < z(i))
                w(j, i) = e;
        }
    return w;
}

}  // namespace detail

// Minimizes ln(max(|X - XW|^2, 1e-12) / (n d)) + lambda1 * |z|_1 over z with
// Adam, where W = st_weights(z). The Heaviside gate is flat, so its gradient
// is passed straight through: the gate's input p_j - p_i takes the gradient
// the gate's output would have received. z starts at init_scale * N(0, I)
// because the origin (all potentials tied, W identically zero) is a stationary
// point the optimizer cannot leave.
inline StResult train_continuous_st(const Dataset& ds, const ContinuousStConfig& cfg) {
    const int d = ds.variable_count();
    const double n = static_cast<double>(ds.sample_count());
    const Eigen::Index dim = PotentialVec::dim_for(d);
    const Eigen::MatrixXd g = ds.gram().gram.block(1, 1, d, d);  // X^T X
    const double tr_g = g.trace();

    Rng rng = make_rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd z(dim);
    for (Eigen::Index i = 0; i < dim; ++i) z(i) = cfg.init_scale * gauss(rng);

    AdamState adam = AdamState::init(dim, cfg.lr);
    StResult out;
    out.loss_trace.reserve(static_cast<std::size_t>(std::min(cfg.max_iters, 100000L)));

    Eigen::VectorXd grad(dim);
    for (long iter = 0; iter < cfg.max_iters; ++iter) {
        const Eigen::MatrixXd w = detail::st_weights(z, d);
        const Eigen::MatrixXd gw = g * w;
        // |X - XW|^2 via the Gram matrix: tr(G) - 2 tr(GW) + sum(W .* GW).
        const double ssq =
            std::max(0.0, tr_g - 2.0 * gw.trace() + (w.array() * gw.array()).sum());
        const double floored = std::max(ssq, 1e-12);
        const double loss = std::log(floored / (n * d)) + cfg.lambda1 * z.cwiseAbs().sum();
        out.loss_trace.push_back(loss);

        // d loss / dW = -2 (G - GW) / ssq  (zero once the floor is active)
        Eigen::MatrixXd gw_grad = Eigen::MatrixXd::Zero(d, d);
        if (ssq > 1e-12) gw_grad = (-2.0 / ssq) * (g - gw);

        grad.setZero();
        Eigen::Index idx = d;
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j, ++idx) {
                const double e = z(idx);
                // Edge potential: only the direction the gate selected fed a
                // W entry, so only that direction's gradient reaches e.
                if (z(i) < z(j))
                    grad(idx) += gw_grad(i, j);
                else if (z(j) < z(i))
                    grad(idx) += gw_grad(j, i);
                // Node potentials: the straight-through pass treats both
                // gates H(p_j - p_i) and H(p_i - p_j) as identity, so the
                // inactive direction also pulls on p — that signal is what
                // lets the optimizer flip an orientation.
                const double s_ij = gw_grad(i, j) * e;  // d loss / d M_ij
                const double s_ji = gw_grad(j, i) * e;  // d loss / d M_ji
                grad(j) += s_ij - s_ji;
                grad(i) += s_ji - s_ij;
            }
        grad.array() += cfg.lambda1 * z.array().sign();
        adam_step(adam, z, grad);

        const long lag = static_cast<long>(cfg.plateau_window);
        if (iter >= lag) {
            const double then = out.loss_trace[static_cast<std::size_t>(iter - lag)];
            const double rel = std::abs(loss - then) / std::max(std::abs(then), 1e-12);
            if (rel < cfg.plateau_rel_tol) break;
        }
    }

    out.z = z;
    out.graph.node_count = d;
    out.graph.weights = detail::st_weights(z, d);
    return out;
}

inline StResult train_continuous_st(const Dataset& ds, double lr, double lambda1,
                                    long max_iters) {
    ContinuousStConfig cfg;
    cfg.lr = lr;
    cfg.lambda1 = lambda1;
    cfg.max_iters = max_iters;
    return train_continuous_st(ds, cfg);
}

}  // namespace dagforge
