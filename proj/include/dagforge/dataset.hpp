#pragma once

#include <Eigen/Dense>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

#include "dagforge/common.hpp"

namespace dagforge {

// Cached cross-products for fast repeated least-squares fits on one data
// matrix. With D = [1 | X] (intercept column first), gram = D^T D and the
// column sums / squared norms fall out of it. Built once, then every fit on a
// parent subset is a small dense solve instead of an O(n) pass over the data.
struct GramInfo {
    Eigen::MatrixXd gram;  // (d+1) x (d+1), row/col 0 is the intercept
    Eigen::VectorXd col_squared_norms;  // diag of X^T X, size d
};

// A samples-by-variables data matrix plus lazily built regression scaffolding.
// Rows are observations, columns are variables. The Gram matrix is built on
// first use and shared; concurrent readers are fine because construction is
// guarded and the result is immutable afterwards. The lazy state lives behind
// a shared pointer so datasets stay copyable and movable (copies share the
// Gram, which is sound because they share the data).
class Dataset {
  public:
    Dataset() : lazy_(std::make_shared<LazyGram>()) {}
    explicit Dataset(Eigen::MatrixXd data)
        : data_(std::move(data)), lazy_(std::make_shared<LazyGram>()) {
        if (data_.rows() < 1 || data_.cols() < 1)
            throw std::invalid_argument("Dataset: data must be non-empty");
        if (!data_.allFinite())
            throw std::invalid_argument("Dataset: data must be finite");
    }

    const Eigen::MatrixXd& data() const { return data_; }
    Eigen::Index sample_count() const { return data_.rows(); }
    int variable_count() const { return static_cast<int>(data_.cols()); }

    const GramInfo& gram() const {
        std::call_once(lazy_->once, [this] {
            const Eigen::Index n = data_.rows();
            const Eigen::Index d = data_.cols();
            auto info = std::make_unique<GramInfo>();
            info->gram.resize(d + 1, d + 1);
            info->gram(0, 0) = static_cast<double>(n);
            const Eigen::VectorXd sums = data_.colwise().sum();
            info->gram.block(0, 1, 1, d) = sums.transpose();
            info->gram.block(1, 0, d, 1) = sums;
            info->gram.block(1, 1, d, d).noalias() = data_.transpose() * data_;
            info->col_squared_norms = info->gram.block(1, 1, d, d).diagonal();
            lazy_->info = std::move(info);
        });
        return *lazy_->info;
    }

    // FNV-1a over the raw matrix bytes, column-major as stored. Used to stamp
    // run manifests so a result can be matched to the exact data it saw.
    std::uint64_t fingerprint() const {
        return fnv1a(data_.data(), static_cast<std::size_t>(data_.size()) * sizeof(double));
    }

  private:
    struct LazyGram {
        std::once_flag once;
        std::unique_ptr<GramInfo> info;
    };

    Eigen::MatrixXd data_;
    std::shared_ptr<LazyGram> lazy_;
};

// Provenance of a generated dataset, written alongside it so downstream runs
// can be reproduced without re-deriving the generator settings.
struct DatasetMeta {
    std::string graph_csv_path;
    int d = 0;
    long n = 0;
    std::string model;       // "er" or "sf"
    int k = 0;               // edges-per-node density parameter
    std::string mechanism;   // "linear", "gp", "mlp", "pnl-gp"
    std::string noise;       // "gauss", "exp", "gumbel", "laplace", "uniform"
    std::string weight_range;  // "regular" or "wide"
    std::uint64_t seed = 0;
    bool standardized = false;
};

}  // namespace dagforge
