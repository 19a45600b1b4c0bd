#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <list>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "dagforge/dag.hpp"
#include "dagforge/dataset.hpp"
#include "dagforge/gp.hpp"
#include "dagforge/regression.hpp"
#include "dagforge/vec2dag.hpp"

namespace dagforge {

enum class ScoreKind { BIC_EV, BIC_NV, LS };
enum class RegressorKind { OLS, GP };

struct ScoreConfig {
    ScoreKind kind = ScoreKind::BIC_EV;
    RegressorKind regressor = RegressorKind::OLS;
    double lambda0 = 0.0;  // LS sparsity weight; ignored by the BIC kinds
    GpConfig gp;
};

// Floor applied to per-node SSR before any logarithm; keeps the BIC finite on
// degenerate (perfectly collinear) inputs and is inert otherwise.
inline constexpr double kSsrFloor = 1e-12;

// Memo table for per-(node, parent set) residuals, keyed by a 64-bit parent
// bitmask — hence usable only for d <= 64; callers bypass it above that.
// Values are raw SSRs exactly as the regressor produced them, so a hit is
// bit-for-bit identical to recomputation on the same dataset. One cache must
// serve one (dataset, regressor config) pair; nothing ties entries to either.
// Thread-safe; with a capacity bound it evicts least-recently-used entries.
class ScoreCache {
  public:
    explicit ScoreCache(std::size_t capacity = 0) : capacity_(capacity) {}

    std::optional<double> get(int node, std::uint64_t parent_mask) {
        const Key key{node, parent_mask};
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = map_.find(key);
        if (it == map_.end()) {
            ++misses_;
            return std::nullopt;
        }
        ++hits_;
        if (capacity_ > 0) lru_.splice(lru_.begin(), lru_, it->second.order);
        return it->second.value;
    }

    void put(int node, std::uint64_t parent_mask, double value) {
        const Key key{node, parent_mask};
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = map_.find(key);
        if (it != map_.end()) return;  // duplicate insert: identical value, keep the first
        if (capacity_ > 0) {
            if (map_.size() >= capacity_) {
                map_.erase(lru_.back());
                lru_.pop_back();
            }
            lru_.push_front(key);
            map_.emplace(key, Entry{value, lru_.begin()});
        } else {
            map_.emplace(key, Entry{value, {}});
        }
    }

    std::size_t size() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return map_.size();
    }
    std::size_t hits() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return hits_;
    }
    std::size_t misses() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return misses_;
    }

  private:
    struct Key {
        int node;
        std::uint64_t mask;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return static_cast<std::size_t>(
                mix64(k.mask ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(k.node) + 1))));
        }
    };
    struct Entry {
        double value;
        std::list<Key>::iterator order;  // valid only when capacity_ > 0
    };

    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::unordered_map<Key, Entry, KeyHash> map_;
    std::list<Key> lru_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

inline std::uint64_t parent_mask(const std::vector<int>& parents) {
    std::uint64_t m = 0;
    for (int p : parents) m |= std::uint64_t{1} << p;
    return m;
}

// Residual sum of squares of `node` regressed on `parents` under the selected
// regressor. Raw value — no floor; the score formulas floor at the point of
// taking logs.
inline double ssr(const Dataset& ds, int node, const std::vector<int>& parents,
                  RegressorKind regressor, const GpConfig& gp_cfg = {}) {
    double value = regressor == RegressorKind::OLS ? ols_fit(ds, node, parents).ssr
                                                   : gp_ssr(ds, node, parents, gp_cfg);
    if (!std::isfinite(value))
        throw NumericError("ssr: non-finite residual for node " + std::to_string(node));
    return value;
}

namespace detail {

inline double cached_ssr(const Dataset& ds, int node, const std::vector<int>& parents,
                         const ScoreConfig& cfg, ScoreCache* cache) {
    const bool usable = cache != nullptr && ds.variable_count() <= 64;
    std::uint64_t mask = 0;
    if (usable) {
        mask = parent_mask(parents);
        if (auto hit = cache->get(node, mask)) return *hit;
    }
    const double value = ssr(ds, node, parents, cfg.regressor, cfg.gp);
    if (usable) cache->put(node, mask, value);
    return value;
}

}  // namespace detail

// Decomposable graph score. All three kinds share the per-node SSRs:
//   BIC-EV: -( n d ln(sum_i SSR_i / (n d)) + |G| ln n )   (equal noise variances)
//   BIC-NV: -( n sum_i ln(SSR_i / n) + |G| ln n )          (per-node variances)
//   LS:     -( sum_i SSR_i + lambda0 |G| )
// Higher is better for all of them. The cache, when given, carries the SSRs.
inline double score(const Dataset& ds, const Dag& g, const ScoreConfig& cfg,
                    ScoreCache* cache = nullptr) {
    const int d = ds.variable_count();
    if (g.node_count != d)
        throw std::invalid_argument("score: graph/data dimension mismatch");
    const double n = static_cast<double>(ds.sample_count());

    double ssr_sum = 0.0;
    double log_term_sum = 0.0;  // BIC-NV accumulator
    int edge_total = 0;
    std::vector<int> parents;
    for (int i = 0; i < d; ++i) {
        parents.clear();
        for (int j = 0; j < d; ++j)
            if (g.adj(j, i) != 0) parents.push_back(j);
        edge_total += static_cast<int>(parents.size());
        const double raw = detail::cached_ssr(ds, i, parents, cfg, cache);
        if (cfg.kind == ScoreKind::LS) {
            ssr_sum += raw;
        } else {
            const double floored = std::max(raw, kSsrFloor);
            ssr_sum += floored;
            log_term_sum += std::log(floored / n);
        }
    }

    switch (cfg.kind) {
        case ScoreKind::BIC_EV:
            return -(n * d * std::log(ssr_sum / (n * d)) + edge_total * std::log(n));
        case ScoreKind::BIC_NV:
            return -(n * log_term_sum + edge_total * std::log(n));
        case ScoreKind::LS:
            return -(ssr_sum + cfg.lambda0 * edge_total);
    }
    throw std::logic_error("score: unreachable");
}

// Score of the graph the vector maps to, divided by n*d to keep policy-gradient
// magnitudes tame. A strictly monotone transform of score, so argmaxes agree.
inline double reward(const Dataset& ds, const PotentialVec& z, const ScoreConfig& cfg,
                     ScoreCache* cache = nullptr) {
    const double s = score(ds, vec_to_dag(z), cfg, cache);
    return s / (static_cast<double>(ds.sample_count()) * ds.variable_count());
}

}  // namespace dagforge
