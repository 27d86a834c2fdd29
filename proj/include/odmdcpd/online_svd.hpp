#pragma once

#include <Eigen/Dense>

#include "odmdcpd/errors.hpp"

namespace odmdcpd {

/// Rank-r truncated SVD of a column stream, maintained incrementally.
/// New columns whose out-of-subspace energy falls below `tol` are parked in
/// a projected-coordinate buffer and folded in on the next significant
/// update; a reorthogonalization rule keeps the left factor orthonormal
/// over long runs. The oldest columns can be reverted, deflating the core
/// instead of refactoring the history.
class OnlineSvd {
public:
    /// Batch bootstrap: best rank-r factorization of the initial columns.
    /// Batch computation is allowed only here.
    static OnlineSvd initialize(const Eigen::MatrixXd& init_cols, int rank, double tol = -1.0);

    /// Folds in new columns (Algorithm-1-style update, any c >= 1).
    /// Returns true when the factors changed, false when the columns were
    /// buffered as low-energy.
    bool update(const Eigen::MatrixXd& cols);

    /// Removes the influence of the `count` oldest tracked columns.
    void revert(int count);

    /// Commits buffered low-energy columns.
    void flush();

    const Eigen::MatrixXd& basis() const { return u_; }           // m x r
    const Eigen::VectorXd& singular_values() const { return sigma_; }
    const Eigen::MatrixXd& right_vectors() const { return v_; }   // committed cols x r

    int rank() const { return static_cast<int>(sigma_.size()); }
    long long columns() const { return v_.rows() + buffer_count_; }
    int pending_updates() const { return buffer_count_; }
    int deferred_reverts() const { return deferred_reverts_; }
    double tol() const { return tol_; }

    /// max|UᵀU - I|, the orthogonality drift the update rule bounds.
    double orthogonality_error() const;

    /// Rank-r reconstruction of the tracked matrix (committed columns).
    Eigen::MatrixXd reconstruction() const;

private:
    OnlineSvd() = default;
    void commit(const Eigen::MatrixXd& cols, const Eigen::MatrixXd& proj,
                const Eigen::MatrixXd& resid);
    void revert_block(int count);
    void refactor_exact();
    void guard_orthogonality();

    Eigen::MatrixXd u_;
    Eigen::VectorXd sigma_;
    Eigen::MatrixXd v_;
    Eigen::MatrixXd buffer_;  // r x q_u projected coordinates of parked columns
    int buffer_count_ = 0;
    int deferred_reverts_ = 0;
    double tol_ = 0.0;
};

}  // namespace odmdcpd
