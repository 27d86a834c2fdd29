#pragma once

#include <Eigen/Dense>

#include "odmdcpd/errors.hpp"

namespace odmdcpd {

/// Eigendecomposition of the reduced state operator plus the lifted modes.
struct ModeSet {
    Eigen::VectorXcd eigenvalues;   // sorted by modulus, descending
    Eigen::MatrixXcd eigenvectors;  // reduced, p x p
    Eigen::MatrixXcd modes;         // lifted through the projection basis, m x p
    bool defective = false;         // eigenvectors replaced by a Schur basis
};

/// Column-wise projection onto an orthonormal basis and the per-column
/// squared reconstruction errors.
struct Projection {
    Eigen::MatrixXd coords;
    Eigen::MatrixXd reconstruction;
    Eigen::VectorXd col_sq_errors;
};
Projection project_reconstruct(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& data);

/// Reduced-order operator [Ã B̃] and its precision matrix, maintained by
/// recursive least squares. Mini-batch updates use the Woodbury identity;
/// forgetting re-applies an update with negated weights; `align` carries the
/// state across rotations of the tracked subspace.
class OnlineDmd {
public:
    OnlineDmd(int rank_state, int rank_control, double rho = 1e4);

    /// x: (p+q) x c projected inputs, xp: p x c projected outputs.
    /// Empty weights mean all ones; weights must be nonzero.
    void update(const Eigen::MatrixXd& x, const Eigen::MatrixXd& xp,
                const Eigen::VectorXd& weights = Eigen::VectorXd());

    /// Removes previously learned columns: an update with negated weights.
    void revert(const Eigen::MatrixXd& x, const Eigen::MatrixXd& xp,
                const Eigen::VectorXd& weights = Eigen::VectorXd());

    /// Rotates the reduced operator and precision into the new basis.
    /// u_prev/u_new: m x (p+q) subspace bases before and after SVD motion.
    void align(const Eigen::MatrixXd& u_prev, const Eigen::MatrixXd& u_new);

    /// Eigenvalues/vectors of Ã; modes lifted through `u_state` (m x p).
    ModeSet modes(const Eigen::MatrixXd& u_state) const;

    const Eigen::MatrixXd& op() const { return a_bar_; }  // p x (p+q)
    Eigen::MatrixXd state_op() const { return a_bar_.leftCols(p_); }
    Eigen::MatrixXd control_op() const { return a_bar_.rightCols(q_); }
    const Eigen::MatrixXd& precision() const { return p_mat_; }

    int rank_state() const { return p_; }
    int rank_control() const { return q_; }
    int rank() const { return p_ + q_; }
    long long updates_seen() const { return updates_seen_; }

    // Alignment diagnostics: defect of the last rotation ‖KKᵀ-I‖_max, the
    // discarded state/control mixing ‖K_pq‖_F, and how often the defect
    // exceeded the subspace-jump threshold.
    double last_alignment_defect() const { return last_alignment_defect_; }
    double last_mixing_norm() const { return last_mixing_norm_; }
    long long subspace_jump_warnings() const { return subspace_jump_warnings_; }

private:
    void apply(const Eigen::MatrixXd& x, const Eigen::MatrixXd& xp, const Eigen::VectorXd& inv_w);

    int p_ = 0;
    int q_ = 0;
    Eigen::MatrixXd a_bar_;
    Eigen::MatrixXd p_mat_;
    long long updates_seen_ = 0;
    double last_alignment_defect_ = 0.0;
    double last_mixing_norm_ = 0.0;
    long long subspace_jump_warnings_ = 0;
};

/// Exact lifted modes Φ = X' V Σ⁻¹ W from a batch factorization (offline
/// helper; the streaming path uses the projected variant).
Eigen::MatrixXcd exact_modes(const Eigen::MatrixXd& xp, const Eigen::MatrixXd& v,
                             const Eigen::VectorXd& sigma, const Eigen::MatrixXcd& w);

}  // namespace odmdcpd
