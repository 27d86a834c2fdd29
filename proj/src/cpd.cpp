#include "odmdcpd/cpd.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace odmdcpd {

void CpdConfig::validate(int state_dim, int control_dim) const {
    layout.validate();
    hankel.validate();
    if (state_dim < 1) throw ConfigError("cpd: at least one state signal required");
    if (control_dim < 0) throw ConfigError("cpd: negative control dimension");
    if (threshold < 0.0) throw ConfigError("cpd: threshold must be >= 0");
    if (!(rho > 0.0)) throw ConfigError("cpd: rho must be positive");
    if (rank_state < 1) throw ConfigError("cpd: state rank p must be >= 1");
    if (rank_control < 0) throw ConfigError("cpd: control rank q must be >= 0");

    const int rps = hankel.rows_per_signal();
    const bool augmented = control_dim > 0 && !control_matrix.has_value();
    const int x_rows = augmented ? (state_dim + control_dim) * rps : state_dim * rps;
    if (!augmented && rank_control != 0)
        throw ConfigError("cpd: control rank q requires augmented control inputs");
    if (rank_state + rank_control > x_rows)
        throw ConfigError("cpd: total rank p+q exceeds the embedded dimension");
    if (layout.learn < layout.base)
        throw ConfigError("cpd: learning window d must be at least the base window a");

    // Full column rank of the least-squares problem needs (m+l)(h/h_d+1)
    // learning columns, so the learning window must be able to hold them.
    const int min_cols = (state_dim + control_dim) * rps;
    if (layout.learn < min_cols)
        throw ConfigError("cpd: learning window d must hold at least (m+l)(h/h_d+1) = " +
                          std::to_string(min_cols) + " columns");

    if (control_matrix.has_value()) {
        if (control_dim == 0) throw ConfigError("cpd: control matrix given but no control inputs");
        if (control_matrix->rows() != state_dim * rps ||
            control_matrix->cols() != control_dim * rps)
            throw ConfigError("cpd: control matrix must map embedded controls to embedded states");
    }
}

CpdEngine::CpdEngine(int state_dim, int control_dim, CpdConfig cfg)
    : cfg_(std::move(cfg)),
      state_dim_(state_dim),
      control_dim_(control_dim),
      min_learn_cols_((state_dim + control_dim) * cfg_.hankel.rows_per_signal()),
      hank_x_(state_dim, cfg_.hankel),
      hank_xp_(state_dim, cfg_.hankel),
      hank_theta_(control_dim, cfg_.hankel),
      store_(cfg_.layout),
      dmd_(cfg_.rank_state, cfg_.rank_control, cfg_.rho) {
    cfg_.validate(state_dim, control_dim);
    init_x_.resize(0, 0);
    init_xp_.resize(0, 0);
    init_w_.resize(0);
}

int CpdEngine::embedded_rows() const {
    const bool augmented = control_dim_ > 0 && !cfg_.control_matrix.has_value();
    return augmented ? hank_x_.embedded_rows() + hank_theta_.embedded_rows()
                     : hank_x_.embedded_rows();
}

void CpdEngine::notify(long long step, PassOp op) const {
    if (observer_) observer_(step, op);
}

std::optional<CpdScore> CpdEngine::step(const Eigen::VectorXd& state,
                                        const Eigen::VectorXd& state_next,
                                        const Eigen::VectorXd& control, double timestamp,
                                        double weight) {
    RawBatch batch;
    batch.states = state;
    batch.shifted = state_next;
    batch.controls = control.size() > 0 ? Eigen::MatrixXd(control) : Eigen::MatrixXd(0, 1);
    batch.timestamps = {timestamp};
    batch.weights = Eigen::VectorXd::Constant(1, weight);
    auto scores = step_batch(batch);
    if (scores.empty()) return std::nullopt;
    return scores.front();
}

std::vector<CpdScore> CpdEngine::step_batch(const RawBatch& batch) {
    batch.validate();
    if (batch.states.rows() != state_dim_)
        throw DataError("cpd: state dimension changed mid-stream");
    if (static_cast<int>(batch.controls.rows()) != control_dim_)
        throw DataError("cpd: control dimension changed mid-stream");
    if (batch.cols() > cfg_.layout.test)
        throw ConfigError("cpd: mini-batch larger than the test window; split upstream");

    std::vector<CpdScore> out;
    for (int i = 0; i < batch.cols(); ++i) {
        const Eigen::MatrixXd x_h = hank_x_.feed(batch.states.col(i));
        const Eigen::MatrixXd xp_h = hank_xp_.feed(batch.shifted.col(i));
        const Eigen::MatrixXd th_h =
            control_dim_ > 0 ? hank_theta_.feed(batch.controls.col(i)) : Eigen::MatrixXd(0, x_h.cols());
        ++raw_seen_;
        if (x_h.cols() == 0) continue;  // embedding warm-up

        const PreparedPair pair = prepare_pair(x_h, xp_h, th_h, cfg_.control_matrix);
        const Eigen::VectorXd w =
            batch.weights.size() > 0 ? batch.weights.segment(i, 1) : Eigen::VectorXd::Ones(1);
        const EmbeddedWindows win =
            store_.advance(pair.x, pair.xp, w, {batch.timestamps[static_cast<std::size_t>(i)]});

        // Detection strictly precedes learning within the pass.
        if (win.windows_ready && svd_.has_value()) {
            out.push_back(detect(win));
            notify(out.back().step, PassOp::Detect);
        }
        learn(win);
    }
    return out;
}

CpdScore score_from_errors(long long step, double timestamp, double base_error,
                           double test_error, double base_scale, double threshold) {
    CpdScore s;
    s.step = step;
    s.timestamp = timestamp;
    s.base_error = base_error;
    s.test_error = test_error;

    // Noise-free streams can reconstruct the base perfectly; floor the
    // denominator at machine precision of the window's energy scale.
    const double floor = std::numeric_limits<double>::epsilon() * std::max(1.0, base_scale);
    double base_eff = base_error;
    if (base_eff < floor) {
        base_eff = floor;
        s.degenerate_base = true;
    }
    s.ratio = std::max(0.0, test_error / base_eff - 1.0);
    s.difference = test_error - base_error;
    s.alarm = s.ratio > threshold;
    return s;
}

CpdScore CpdEngine::detect(const EmbeddedWindows& win) const {
    const Eigen::MatrixXd basis = score_basis_matrix();
    const Projection base = project_reconstruct(basis, win.base_x);
    const Projection test = project_reconstruct(basis, win.test_x);
    return score_from_errors(win.head - 1 + cfg_.hankel.delays, win.head_timestamp,
                             base.col_sq_errors.sum() / static_cast<double>(cfg_.layout.base),
                             test.col_sq_errors.sum() / static_cast<double>(cfg_.layout.test),
                             win.base_x.squaredNorm() / static_cast<double>(cfg_.layout.base),
                             cfg_.threshold);
}

Eigen::MatrixXd CpdEngine::score_basis_matrix() const {
    if (!svd_.has_value()) return Eigen::MatrixXd();
    const Eigen::MatrixXd u_state = svd_->basis().leftCols(cfg_.rank_state);
    if (cfg_.score_basis == ScoreBasis::PodSubspace) return u_state;

    // Experimental: orthonormal basis spanned by the real and imaginary
    // parts of the DMD modes.
    const ModeSet ms = dmd_.modes(u_state);
    Eigen::MatrixXd stacked(ms.modes.rows(), 2 * ms.modes.cols());
    stacked.leftCols(ms.modes.cols()) = ms.modes.real();
    stacked.rightCols(ms.modes.cols()) = ms.modes.imag();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stacked);
    const int rank = static_cast<int>(qr.rank());
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(stacked.rows(), rank);
    return q;
}

void CpdEngine::learn(const EmbeddedWindows& win) {
    if (win.new_count == 0 && win.revert_count == 0) return;
    const int p = cfg_.rank_state;
    const int state_rows = hank_xp_.embedded_rows();

    if (!svd_.has_value()) {
        // Bootstrap: collect learning columns until the least-squares
        // problem has full column rank, then batch-initialize.
        if (win.new_count > 0) {
            const Eigen::Index old = init_x_.cols();
            init_x_.conservativeResize(win.learn_x.rows(), old + win.new_count);
            init_xp_.conservativeResize(win.learn_xp.rows(), old + win.new_count);
            init_w_.conservativeResize(old + win.new_count);
            init_x_.rightCols(win.new_count) = win.learn_x.rightCols(win.new_count);
            init_xp_.rightCols(win.new_count) = win.learn_xp.rightCols(win.new_count);
            init_w_.tail(win.new_count) = win.learn_weights.tail(win.new_count);
        }
        if (init_x_.cols() >= std::max(min_learn_cols_, dmd_.rank())) {
            svd_ = OnlineSvd::initialize(init_x_, dmd_.rank(), cfg_.svd_tol);
            notify(win.head, PassOp::SvdInit);
            const Eigen::MatrixXd xt = svd_->basis().transpose() * init_x_;
            const Eigen::MatrixXd xpt =
                svd_->basis().topRows(state_rows).leftCols(p).transpose() * init_xp_;
            dmd_.update(xt, xpt, init_w_);
            notify(win.head, PassOp::DmdUpdate);
            init_x_.resize(0, 0);
            init_xp_.resize(0, 0);
            init_w_.resize(0);
        }
        return;
    }

    const Eigen::MatrixXd u_start = svd_->basis();
    bool basis_moved = false;

    if (win.revert_count > 0) {
        const Eigen::MatrixXd old_x = win.learn_x.leftCols(win.revert_count);
        const Eigen::MatrixXd old_xp = win.learn_xp.leftCols(win.revert_count);
        const Eigen::MatrixXd xt = u_start.transpose() * old_x;
        const Eigen::MatrixXd xpt = u_start.topRows(state_rows).leftCols(p).transpose() * old_xp;
        dmd_.revert(xt, xpt, win.learn_weights.head(win.revert_count));
        notify(win.head, PassOp::DmdRevert);
        svd_->revert(win.revert_count);
        notify(win.head, PassOp::SvdRevert);
        basis_moved = true;
    }

    if (win.new_count > 0) {
        const bool committed = svd_->update(win.learn_x.rightCols(win.new_count));
        notify(win.head, PassOp::SvdUpdate);
        basis_moved = basis_moved || committed;
    }

    if (basis_moved) {
        dmd_.align(u_start, svd_->basis());
        notify(win.head, PassOp::Align);
    }

    if (win.new_count > 0) {
        const Eigen::MatrixXd new_x = win.learn_x.rightCols(win.new_count);
        const Eigen::MatrixXd new_xp = win.learn_xp.rightCols(win.new_count);
        const Eigen::MatrixXd xt = svd_->basis().transpose() * new_x;
        const Eigen::MatrixXd xpt =
            svd_->basis().topRows(state_rows).leftCols(p).transpose() * new_xp;
        dmd_.update(xt, xpt, win.learn_weights.tail(win.new_count));
        notify(win.head, PassOp::DmdUpdate);
    }
}

Eigen::MatrixXd expand_control_matrix(const Eigen::MatrixXd& raw, const HankelConfig& cfg) {
    const int rps = cfg.rows_per_signal();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(raw.rows() * rps, raw.cols() * rps);
    for (int b = 0; b < rps; ++b)
        out.block(b * raw.rows(), b * raw.cols(), raw.rows(), raw.cols()) = raw;
    return out;
}

}  // namespace odmdcpd
