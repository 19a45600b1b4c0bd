#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dagforge/common.hpp"

namespace dagforge {

// Diagonal Gaussian over the flat DAG parameterization. Actions are clamped
// into [-gamma_clip, gamma_clip] before they touch the graph map; densities
// are always evaluated on the pre-clamp draw so the distribution stays proper.
struct PolicyParams {
    Eigen::VectorXd mu;
    Eigen::VectorXd log_sigma;
    double gamma_clip = 10.0;

    static PolicyParams init(Eigen::Index dim, double gamma_clip = 10.0) {
        PolicyParams p;
        p.mu = Eigen::VectorXd::Zero(dim);
        p.log_sigma = Eigen::VectorXd::Zero(dim);
        p.gamma_clip = gamma_clip;
        return p;
    }
    Eigen::Index dim() const { return mu.size(); }
};

// One batch of draws: row k of `pre_clamp` is mu + sigma.*xi, row k of
// `actions` is the same clamped into the hypercube. Log-probs read the first,
// the graph map reads the second.
struct ActionBatch {
    Eigen::MatrixXd pre_clamp;  // B x dim
    Eigen::MatrixXd actions;    // B x dim
    Eigen::Index size() const { return pre_clamp.rows(); }
};

inline ActionBatch sample_actions(const PolicyParams& params, int count, Rng& rng) {
    if (count < 1) throw std::invalid_argument("sample_actions: count must be >= 1");
    const Eigen::Index dim = params.dim();
    const Eigen::VectorXd sigma = params.log_sigma.array().exp();
    ActionBatch batch;
    batch.pre_clamp.resize(count, dim);
    batch.actions.resize(count, dim);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double g = params.gamma_clip;
    for (int k = 0; k < count; ++k)
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double z = params.mu(i) + sigma(i) * gauss(rng);
            batch.pre_clamp(k, i) = z;
            batch.actions(k, i) = std::clamp(z, -g, g);
        }
    return batch;
}

// Diagonal Gaussian log-density at a pre-clamp draw:
//   sum_i [ -1/2 ln(2 pi) - log_sigma_i - (z_i - mu_i)^2 / (2 sigma_i^2) ].
inline double log_prob(const PolicyParams& params, const Eigen::VectorXd& z_pre_clamp) {
    if (z_pre_clamp.size() != params.dim())
        throw std::invalid_argument("log_prob: dimension mismatch");
    const Eigen::ArrayXd diff = z_pre_clamp.array() - params.mu.array();
    const Eigen::ArrayXd inv_var = (-2.0 * params.log_sigma.array()).exp();
    const double k = static_cast<double>(params.dim());
    return -0.5 * k * std::log(2.0 * M_PI) - params.log_sigma.sum() -
           0.5 * (diff.square() * inv_var).sum();
}

// Gradient of log_prob in (mu, log_sigma):
//   d/dmu_i        = (z_i - mu_i) / sigma_i^2
//   d/dlog_sigma_i = (z_i - mu_i)^2 / sigma_i^2 - 1
inline void log_prob_grad(const PolicyParams& params, const Eigen::VectorXd& z_pre_clamp,
                          Eigen::VectorXd& grad_mu, Eigen::VectorXd& grad_log_sigma) {
    const Eigen::ArrayXd diff = z_pre_clamp.array() - params.mu.array();
    const Eigen::ArrayXd inv_var = (-2.0 * params.log_sigma.array()).exp();
    grad_mu = diff * inv_var;
    grad_log_sigma = diff.square() * inv_var - 1.0;
}

// Differential entropy: sum_i 1/2 ln(2 pi e sigma_i^2). Its gradient is 0 in
// mu and exactly 1 per log_sigma coordinate, which callers inline directly.
inline double entropy(const PolicyParams& params) {
    const double k = static_cast<double>(params.dim());
    return 0.5 * k * std::log(2.0 * M_PI * std::numbers::e) + params.log_sigma.sum();
}

// Bias-corrected Adam, descent convention: params -= lr * mhat / (sqrt(vhat) + eps).
// Callers maximizing an objective pass the negated gradient.
struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    long t = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState init(Eigen::Index dim, double lr) {
        AdamState s;
        s.m = Eigen::VectorXd::Zero(dim);
        s.v = Eigen::VectorXd::Zero(dim);
        s.lr = lr;
        return s;
    }
};

inline void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    if (params.size() != state.m.size() || grad.size() != state.m.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    if (!grad.allFinite()) throw NumericError("adam_step: non-finite gradient");
    state.t += 1;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
    state.v = state.beta2 * state.v.array() + (1.0 - state.beta2) * grad.array().square();
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    params.array() -=
        state.lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.eps);
}

}  // namespace dagforge
