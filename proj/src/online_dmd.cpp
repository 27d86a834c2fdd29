#include "odmdcpd/online_dmd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace odmdcpd {

Projection project_reconstruct(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& data) {
    Projection out;
    out.coords = basis.transpose() * data;
    out.reconstruction = basis * out.coords;
    out.col_sq_errors = (data - out.reconstruction).colwise().squaredNorm();
    return out;
}

OnlineDmd::OnlineDmd(int rank_state, int rank_control, double rho) : p_(rank_state), q_(rank_control) {
    if (p_ < 1) throw ConfigError("online_dmd: state rank must be >= 1");
    if (q_ < 0) throw ConfigError("online_dmd: control rank must be >= 0");
    if (!(rho > 0.0)) throw ConfigError("online_dmd: rho must be positive");
    a_bar_ = Eigen::MatrixXd::Zero(p_, p_ + q_);
    a_bar_.leftCols(p_) = Eigen::MatrixXd::Identity(p_, p_);
    p_mat_ = rho * Eigen::MatrixXd::Identity(p_ + q_, p_ + q_);
}

void OnlineDmd::apply(const Eigen::MatrixXd& x, const Eigen::MatrixXd& xp,
                      const Eigen::VectorXd& inv_w) {
    const int r = p_ + q_;
    if (x.rows() != r) throw ConfigError("online_dmd: input rows must equal p+q");
    if (xp.rows() != p_) throw ConfigError("online_dmd: output rows must equal p");
    if (x.cols() != xp.cols()) throw ConfigError("online_dmd: column count mismatch");

    // Γ = (C⁻¹ + XᵀPX)⁻¹ through a symmetric solve; Γ·XᵀP is all we need.
    const Eigen::MatrixXd px = p_mat_ * x;
    Eigen::MatrixXd s = x.transpose() * px;
    s.diagonal() += inv_w;
    s = 0.5 * (s + s.transpose()).eval();

    // Negated weights make the system indefinite, so LDLT only serves the
    // all-positive path.
    Eigen::MatrixXd gain;  // c x r
    if ((inv_w.array() > 0.0).all()) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
        if (ldlt.info() != Eigen::Success)
            throw NumericalError("online_dmd: update system factorization failed");
        gain = ldlt.solve(px.transpose());
    } else {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(s);
        gain = lu.solve(px.transpose());
    }
    if (!gain.allFinite()) {
        const double scale = s.cwiseAbs().maxCoeff();
        throw NumericalError("online_dmd: singular update system (scale " + std::to_string(scale) + ")");
    }

    a_bar_ += (xp - a_bar_ * x) * gain;
    p_mat_ -= px * gain;
    p_mat_ = 0.5 * (p_mat_ + p_mat_.transpose()).eval();
    ++updates_seen_;
}

void OnlineDmd::update(const Eigen::MatrixXd& x, const Eigen::MatrixXd& xp,
                       const Eigen::VectorXd& weights) {
    const Eigen::Index c = x.cols();
    Eigen::VectorXd inv_w(c);
    if (weights.size() == 0) {
        inv_w.setOnes();
    } else {
        if (weights.size() != c) throw ConfigError("online_dmd: one weight per column required");
        for (Eigen::Index i = 0; i < c; ++i) {
            if (weights(i) == 0.0) throw ConfigError("online_dmd: zero snapshot weight");
            inv_w(i) = 1.0 / weights(i);
        }
    }
    apply(x, xp, inv_w);
}

void OnlineDmd::revert(const Eigen::MatrixXd& x, const Eigen::MatrixXd& xp,
                       const Eigen::VectorXd& weights) {
    const Eigen::Index c = x.cols();
    Eigen::VectorXd inv_w(c);
    if (weights.size() == 0) {
        inv_w.setConstant(-1.0);
    } else {
        if (weights.size() != c) throw ConfigError("online_dmd: one weight per column required");
        for (Eigen::Index i = 0; i < c; ++i) {
            if (weights(i) == 0.0) throw ConfigError("online_dmd: zero snapshot weight");
            inv_w(i) = -1.0 / weights(i);
        }
    }
    apply(x, xp, inv_w);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> chk(p_mat_, Eigen::EigenvaluesOnly);
    if (chk.info() != Eigen::Success || chk.eigenvalues().minCoeff() <= 0.0)
        throw StateError("online_dmd: precision lost positive definiteness; window shrank below rank support");
}

void OnlineDmd::align(const Eigen::MatrixXd& u_prev, const Eigen::MatrixXd& u_new) {
    const int r = p_ + q_;
    if (u_prev.cols() != r || u_new.cols() != r)
        throw ConfigError("online_dmd: alignment bases must have p+q columns");

    const Eigen::MatrixXd k = u_new.transpose() * u_prev;
    last_alignment_defect_ =
        (k * k.transpose() - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff();
    last_mixing_norm_ = q_ > 0 ? k.topRightCorner(p_, q_).norm() : 0.0;
    if (last_alignment_defect_ > 0.1) ++subspace_jump_warnings_;

    const Eigen::MatrixXd kpp = k.topLeftCorner(p_, p_);
    Eigen::MatrixXd aligned(p_, r);
    aligned.leftCols(p_) = kpp * a_bar_.leftCols(p_) * kpp.transpose();
    if (q_ > 0) {
        const Eigen::MatrixXd kqq = k.bottomRightCorner(q_, q_);
        aligned.rightCols(q_) = kpp * a_bar_.rightCols(q_) * kqq;
    }
    a_bar_ = std::move(aligned);

    // P ← (K P⁻¹ Kᵀ)⁻¹ = K⁻ᵀ P K⁻¹ without forming P⁻¹.
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(k);
    const Eigen::MatrixXd k_inv = lu.inverse();
    if (!k_inv.allFinite()) throw NumericalError("online_dmd: singular alignment rotation");
    p_mat_ = k_inv.transpose() * p_mat_ * k_inv;
    p_mat_ = 0.5 * (p_mat_ + p_mat_.transpose()).eval();
}

ModeSet OnlineDmd::modes(const Eigen::MatrixXd& u_state) const {
    if (u_state.cols() != p_) throw ConfigError("online_dmd: mode basis must have p columns");

    const Eigen::MatrixXd a = a_bar_.leftCols(p_);
    Eigen::EigenSolver<Eigen::MatrixXd> eig(a);
    if (eig.info() != Eigen::Success) throw NumericalError("online_dmd: eigensolver failed");

    Eigen::VectorXcd lambda = eig.eigenvalues();
    Eigen::MatrixXcd w = eig.eigenvectors();

    std::vector<int> order(p_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        const double mi = std::abs(lambda(i)), mj = std::abs(lambda(j));
        if (mi != mj) return mi > mj;
        if (lambda(i).real() != lambda(j).real()) return lambda(i).real() > lambda(j).real();
        return lambda(i).imag() > lambda(j).imag();
    });
    Eigen::VectorXcd lam_sorted(p_);
    Eigen::MatrixXcd w_sorted(p_, p_);
    for (int i = 0; i < p_; ++i) {
        lam_sorted(i) = lambda(order[i]);
        w_sorted.col(i) = w.col(order[i]);
    }

    ModeSet out;
    out.eigenvalues = lam_sorted;
    const double scale = std::max(1.0, a.norm());
    const double resid = (a.cast<std::complex<double>>() * w_sorted -
                          w_sorted * lam_sorted.asDiagonal()).norm();
    if (resid > 1e-8 * scale) {
        // Defective operator: fall back to an orthonormal Schur basis.
        Eigen::ComplexSchur<Eigen::MatrixXcd> schur(a.cast<std::complex<double>>());
        w_sorted = schur.matrixU();
        out.defective = true;
    }
    out.eigenvectors = w_sorted;
    out.modes = u_state.cast<std::complex<double>>() * w_sorted;
    return out;
}

Eigen::MatrixXcd exact_modes(const Eigen::MatrixXd& xp, const Eigen::MatrixXd& v,
                             const Eigen::VectorXd& sigma, const Eigen::MatrixXcd& w) {
    if (sigma.minCoeff() <= 0.0) throw NumericalError("exact_modes: zero singular value");
    return (xp * v * sigma.cwiseInverse().asDiagonal()).cast<std::complex<double>>() * w;
}

}  // namespace odmdcpd
