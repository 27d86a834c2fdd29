#include "odmdcpd/online_svd.hpp"

#include <algorithm>
#include <cmath>

namespace odmdcpd {

namespace {

// Thin QR with a deterministic sign convention: diagonal of R nonnegative.
void thin_qr_positive(const Eigen::MatrixXd& a, Eigen::MatrixXd& q) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
    Eigen::MatrixXd r = q.transpose() * a;
    for (Eigen::Index i = 0; i < a.cols(); ++i)
        if (r(i, i) < 0.0) q.col(i) = -q.col(i);
}

struct ThinSvd {
    Eigen::MatrixXd u;
    Eigen::VectorXd s;
    Eigen::MatrixXd v;
};

ThinSvd svd_of(const Eigen::MatrixXd& m, int rank) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    ThinSvd out;
    out.u = svd.matrixU().leftCols(rank);
    out.s = svd.singularValues().head(rank);
    out.v = svd.matrixV().leftCols(rank);
    return out;
}

}  // namespace

OnlineSvd OnlineSvd::initialize(const Eigen::MatrixXd& init_cols, int rank, double tol) {
    const Eigen::Index m = init_cols.rows(), n = init_cols.cols();
    if (rank < 1 || rank > std::min(m, n))
        throw ConfigError("online_svd: rank must satisfy 1 <= r <= min(rows, cols)");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(init_cols, Eigen::ComputeThinU | Eigen::ComputeThinV);
    OnlineSvd s;
    s.u_ = svd.matrixU().leftCols(rank);
    s.sigma_ = svd.singularValues().head(rank);
    s.v_ = svd.matrixV().leftCols(rank);
    s.tol_ = tol >= 0.0 ? tol : 1e-10 * std::sqrt(static_cast<double>(m));
    s.buffer_.resize(rank, 0);
    return s;
}

double OnlineSvd::orthogonality_error() const {
    const int r = rank();
    return (u_.transpose() * u_ - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd OnlineSvd::reconstruction() const {
    return u_ * sigma_.asDiagonal() * v_.transpose();
}

bool OnlineSvd::update(const Eigen::MatrixXd& cols) {
    if (cols.rows() != u_.rows())
        throw ConfigError("online_svd: column dimension does not match tracked basis");
    if (cols.cols() < 1) throw ConfigError("online_svd: empty update");

    Eigen::MatrixXd proj = u_.transpose() * cols;            // r x c
    const Eigen::MatrixXd resid = cols - u_ * proj;          // m x c
    Eigen::MatrixXd eq;
    thin_qr_positive(resid, eq);
    Eigen::MatrixXd k = eq.transpose() * resid;              // c x c

    if (k.cwiseAbs().maxCoeff() < tol_) {
        // Low-energy update: park projected coordinates, factors untouched.
        const int c = static_cast<int>(cols.cols());
        buffer_.conservativeResize(Eigen::NoChange, buffer_count_ + c);
        buffer_.rightCols(c) = proj;
        buffer_count_ += c;
        return false;
    }

    commit(cols, proj, resid);
    return true;
}

void OnlineSvd::flush() {
    if (buffer_count_ == 0) return;
    const int r = rank();

    // Inner decomposition of [Σ | buffered coordinates].
    Eigen::MatrixXd y(r, r + buffer_count_);
    y.leftCols(r) = Eigen::MatrixXd(sigma_.asDiagonal());
    y.rightCols(buffer_count_) = buffer_;
    const ThinSvd inner = svd_of(y, r);

    u_ = u_ * inner.u;
    sigma_ = inner.s;
    Eigen::MatrixXd v_new(v_.rows() + buffer_count_, r);
    v_new.topRows(v_.rows()) = v_ * inner.v.topRows(r);
    v_new.bottomRows(buffer_count_) = inner.v.bottomRows(buffer_count_);
    v_ = std::move(v_new);

    buffer_.resize(r, 0);
    buffer_count_ = 0;
    guard_orthogonality();
}

void OnlineSvd::commit(const Eigen::MatrixXd& cols, const Eigen::MatrixXd& proj_in,
                       const Eigen::MatrixXd& resid) {
    const int r = rank();
    const int c = static_cast<int>(cols.cols());
    Eigen::MatrixXd proj = proj_in;

    Eigen::MatrixXd core_rot = Eigen::MatrixXd::Identity(r, r);  // U0
    if (buffer_count_ > 0) {
        Eigen::MatrixXd y(r, r + buffer_count_);
        y.leftCols(r) = Eigen::MatrixXd(sigma_.asDiagonal());
        y.rightCols(buffer_count_) = buffer_;
        const ThinSvd inner = svd_of(y, r);
        core_rot = inner.u;
        sigma_ = inner.s;
        Eigen::MatrixXd v_new(v_.rows() + buffer_count_, r);
        v_new.topRows(v_.rows()) = v_ * inner.v.topRows(r);
        v_new.bottomRows(buffer_count_) = inner.v.bottomRows(buffer_count_);
        v_ = std::move(v_new);
        proj = core_rot.transpose() * proj;
        buffer_.resize(r, 0);
        buffer_count_ = 0;
    }

    // Reorthogonalization rule: reproject the residual basis when it has
    // drifted into span(U).
    Eigen::MatrixXd eq;
    thin_qr_positive(resid, eq);
    if ((eq.transpose() * u_.col(0)).cwiseAbs().maxCoeff() > tol_) {
        Eigen::MatrixXd corrected = eq - u_ * (u_.transpose() * eq);
        thin_qr_positive(corrected, eq);
    }
    const Eigen::MatrixXd k = eq.transpose() * resid;  // c x c

    // Augmented core [Σ, proj; 0, K], truncated back to rank r.
    Eigen::MatrixXd y(r + c, r + c);
    y.setZero();
    y.topLeftCorner(r, r) = Eigen::MatrixXd(sigma_.asDiagonal());
    y.topRightCorner(r, c) = proj;
    y.bottomRightCorner(c, c) = k;
    const ThinSvd outer = svd_of(y, r);

    Eigen::MatrixXd u_ext(u_.rows(), r + c);
    u_ext.leftCols(r) = u_ * core_rot;
    u_ext.rightCols(c) = eq;
    u_ = u_ext * outer.u;
    sigma_ = outer.s;

    Eigen::MatrixXd v_new(v_.rows() + c, r);
    v_new.topRows(v_.rows()) = v_ * outer.v.topRows(r);
    v_new.bottomRows(c) = outer.v.bottomRows(c);
    v_ = std::move(v_new);

    guard_orthogonality();
}

void OnlineSvd::revert(int count) {
    if (count < 0) throw StateError("online_svd: negative revert count");
    if (count == 0) return;
    if (count > columns()) throw StateError("online_svd: revert exceeds tracked columns");
    if (columns() - count < rank())
        throw StateError("online_svd: revert would destroy the tracked rank");

    // Columns whose right-vector rows are negligible contribute nothing to
    // the factors; drop their rows without re-decomposing.
    if (count <= v_.rows()) {
        const double energy = v_.topRows(count).rowwise().squaredNorm().maxCoeff();
        if (energy < tol_) {
            v_ = v_.bottomRows(v_.rows() - count).eval();
            deferred_reverts_ += count;
            return;
        }
    }

    flush();
    revert_block(count);
}

void OnlineSvd::revert_block(int count) {
    const int r = rank();
    const long long n = v_.rows();

    const Eigen::MatrixXd nmat = v_.topRows(count).transpose();  // r x count
    Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(count, count) - nmat.transpose() * nmat;

    // Symmetric square root of I - NᵀN; round-off overshoot clamps to zero.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const Eigen::VectorXd mu = eig.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXd smat = eig.eigenvectors();
    const Eigen::MatrixXd w = smat * mu.cwiseSqrt().asDiagonal() * smat.transpose();

    // E = B - V·N restricted to an orthonormal basis E' = E·W^{-1}; columns
    // in annihilated directions get zero weight.
    Eigen::MatrixXd e(n, count);
    e = -v_ * nmat;
    e.topRows(count) += Eigen::MatrixXd::Identity(count, count);
    Eigen::VectorXd inv_sqrt(count);
    const double floor = std::max(tol_ * tol_, 1e-300);
    for (int i = 0; i < count; ++i)
        inv_sqrt(i) = mu(i) > floor ? 1.0 / std::sqrt(mu(i)) : 0.0;
    const Eigen::MatrixXd eprime = e * (smat * inv_sqrt.asDiagonal() * smat.transpose());

    // Deflated core Σ̄(I - [N;0][N;W]ᵀ), nonzero rows only.
    Eigen::MatrixXd y(r, r + count);
    y.leftCols(r) = sigma_.asDiagonal() *
                    (Eigen::MatrixXd::Identity(r, r) - nmat * nmat.transpose());
    y.rightCols(count) = -(sigma_.asDiagonal() * (nmat * w));
    const ThinSvd dec = svd_of(y, r);

    u_ = u_ * dec.u;
    sigma_ = dec.s;
    Eigen::MatrixXd v_ext(n, r + count);
    v_ext.leftCols(r) = v_;
    v_ext.rightCols(count) = eprime;
    v_ = (v_ext * dec.v).bottomRows(n - count).eval();
    deferred_reverts_ = 0;

    const Eigen::MatrixXd vtv = v_.transpose() * v_;
    if ((vtv - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff() > std::max(10 * tol_, 1e-9))
        refactor_exact();
    guard_orthogonality();
}

void OnlineSvd::refactor_exact() {
    // Exact re-factorization from possibly non-orthonormal V: X = UΣVᵀ with
    // V = Qv·Rv gives the small core Σ·Rvᵀ to re-decompose.
    const int r = rank();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(v_);
    Eigen::MatrixXd qv = qr.householderQ() * Eigen::MatrixXd::Identity(v_.rows(), r);
    Eigen::MatrixXd rv = qv.transpose() * v_;
    const ThinSvd core = svd_of(sigma_.asDiagonal() * rv.transpose(), r);
    u_ = u_ * core.u;
    sigma_ = core.s;
    v_ = qv * core.v;
}

void OnlineSvd::guard_orthogonality() {
    if (orthogonality_error() <= 10 * tol_) return;
    const int r = rank();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(u_);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(u_.rows(), r);
    Eigen::MatrixXd rr = q.transpose() * u_;
    const ThinSvd core = svd_of(rr * sigma_.asDiagonal(), r);
    u_ = q * core.u;
    sigma_ = core.s;
    v_ = v_ * core.v;
}

}  // namespace odmdcpd
