#include "odmdcpd/stream.hpp"

#include <algorithm>

namespace odmdcpd {

void RawBatch::validate() const {
    if (states.rows() != shifted.rows() || states.cols() != shifted.cols())
        throw DataError("batch: states and shifted states must have identical shape");
    if (controls.size() > 0 && controls.cols() != states.cols())
        throw DataError("batch: controls must have one column per snapshot");
    if (static_cast<Eigen::Index>(timestamps.size()) != states.cols())
        throw DataError("batch: one timestamp per snapshot required");
    for (std::size_t i = 1; i < timestamps.size(); ++i)
        if (!(timestamps[i] > timestamps[i - 1]))
            throw DataError("batch: timestamps must be strictly increasing");
    if (weights.size() > 0 && weights.size() != states.cols())
        throw DataError("batch: one weight per snapshot required");
}

void WindowLayout::validate() const {
    if (base < 1) throw ConfigError("layout: base window size a must be >= 1");
    if (gap < 0) throw ConfigError("layout: gap b must be >= 0");
    if (test < 1) throw ConfigError("layout: test window size c must be >= 1");
    if (learn < 1) throw ConfigError("layout: learning window size d must be >= 1");
}

SnapshotStore::SnapshotStore(WindowLayout layout) : layout_(layout) {
    layout_.validate();
    // The base slice [k-a-b-c, k-b-c) must fit inside the stored b+c+d
    // columns, which needs d >= a.
    if (layout_.learn < layout_.base)
        throw ConfigError("layout: learning window d must be at least the base window a");
}

EmbeddedWindows SnapshotStore::advance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& xp,
                                       const Eigen::VectorXd& weights,
                                       const std::vector<double>& timestamps) {
    const int j = static_cast<int>(x.cols());
    if (j == 0) throw DataError("store: empty batch");
    if (j > layout_.test)
        throw ConfigError("store: mini-batch larger than the test window; split upstream");
    if (xp.cols() != j) throw DataError("store: pair column count mismatch");
    if (static_cast<int>(timestamps.size()) != j) throw DataError("store: timestamp count mismatch");
    if (head_ > 0 && (x.rows() != x_all_.rows() || xp.rows() != xp_all_.rows()))
        throw DataError("store: embedded row dimension changed mid-stream");

    Eigen::VectorXd w = weights.size() > 0 ? weights : Eigen::VectorXd::Ones(j);
    if (w.size() != j) throw DataError("store: weight count mismatch");

    const int b = layout_.gap, c = layout_.test, d = layout_.learn, a = layout_.base;
    const long long head_new = head_ + j;

    EmbeddedWindows out;
    out.head = head_new;
    out.head_timestamp = timestamps.back();

    // Learning pair slice from the pre-roll store: global range
    // [max(0, head - b - c - d), head_new - b - c). The learning window
    // itself moves from [old_lo, old_hi) to [new_lo, new_hi); the slice's
    // leading columns leave it and its trailing columns enter it.
    const long long learn_end = head_new - b - c;
    if (learn_end > 0) {
        const long long old_lo = std::max<long long>(0, head_ - b - c - d);
        const long long old_hi = std::max<long long>(0, learn_end - j);
        const long long new_lo = std::max<long long>(0, learn_end - d);
        const long long store_begin = head_ - size();
        const int width = static_cast<int>(learn_end - old_lo);
        const int off = static_cast<int>(old_lo - store_begin);
        out.learn_x = x_all_.middleCols(off, width);
        out.learn_xp = xp_all_.middleCols(off, width);
        out.learn_weights = w_.segment(off, width);
        out.revert_count = static_cast<int>(std::clamp<long long>(new_lo - old_lo, 0, old_hi - old_lo));
        out.new_count = static_cast<int>(learn_end - std::max(old_hi, new_lo));
    }

    // Roll the store forward by j columns.
    const int cap = layout_.store_capacity();
    if (head_ == 0) {
        x_all_.resize(x.rows(), 0);
        xp_all_.resize(xp.rows(), 0);
    }
    const int keep = static_cast<int>(std::min<long long>(size(), cap - j));
    if (keep < size()) {
        const int drop = size() - keep;
        x_all_ = x_all_.rightCols(keep).eval();
        xp_all_ = xp_all_.rightCols(keep).eval();
        w_ = w_.tail(keep).eval();
        ts_.erase(ts_.begin(), ts_.begin() + drop);
    }
    x_all_.conservativeResize(Eigen::NoChange, keep + j);
    xp_all_.conservativeResize(Eigen::NoChange, keep + j);
    w_.conservativeResize(keep + j);
    x_all_.rightCols(j) = x;
    xp_all_.rightCols(j) = xp;
    w_.tail(j) = w;
    ts_.insert(ts_.end(), timestamps.begin(), timestamps.end());
    head_ = head_new;

    // Base and test slices from the post-roll store.
    if (head_ >= a + b + c) {
        const long long store_begin = head_ - size();
        const int base_off = static_cast<int>(head_ - a - b - c - store_begin);
        const int test_off = static_cast<int>(head_ - c - store_begin);
        out.base_x = x_all_.middleCols(base_off, a);
        out.test_x = x_all_.middleCols(test_off, c);
        out.windows_ready = true;
    }
    return out;
}

PreparedPair prepare_pair(const Eigen::MatrixXd& x_h, const Eigen::MatrixXd& xp_h,
                          const Eigen::MatrixXd& theta_h,
                          const std::optional<Eigen::MatrixXd>& known_control) {
    if (x_h.cols() != xp_h.cols())
        throw ConfigError("prepare_pair: snapshot pair column count mismatch");
    const bool has_control = theta_h.rows() > 0;
    if (has_control && theta_h.cols() != x_h.cols())
        throw ConfigError("prepare_pair: control column count mismatch");

    PreparedPair out;
    if (known_control.has_value() || !has_control) {
        out.x = x_h;
        out.xp = xp_h;
        if (known_control.has_value() && has_control) {
            const Eigen::MatrixXd& bmat = *known_control;
            if (bmat.rows() != xp_h.rows() || bmat.cols() != theta_h.rows())
                throw ConfigError("prepare_pair: control matrix shape mismatch");
            out.xp = xp_h - bmat * theta_h;
        }
    } else {
        out.x.resize(x_h.rows() + theta_h.rows(), x_h.cols());
        out.x.topRows(x_h.rows()) = x_h;
        out.x.bottomRows(theta_h.rows()) = theta_h;
        out.xp = xp_h;
    }
    return out;
}

}  // namespace odmdcpd
