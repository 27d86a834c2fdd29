#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "odmdcpd/errors.hpp"

namespace odmdcpd {

/// A mini-batch of raw snapshot pairs plus control inputs. `shifted` holds
/// the one-step-ahead states, column for column. `controls` may have zero
/// rows for autonomous streams; `weights` may be empty (all ones).
struct RawBatch {
    Eigen::MatrixXd states;      // m x j
    Eigen::MatrixXd shifted;     // m x j
    Eigen::MatrixXd controls;    // l x j
    std::vector<double> timestamps;
    Eigen::VectorXd weights;

    int cols() const { return static_cast<int>(states.cols()); }
    void validate() const;
};

/// The four window parameters: base size a, gap b between test and base,
/// test size c, learning size d (all in snapshots).
struct WindowLayout {
    int base = 1;
    int gap = 0;
    int test = 1;
    int learn = 1;

    void validate() const;
    int store_capacity() const { return gap + test + learn; }
};

/// Slices handed out per pass. The learning pair covers the store region
/// [k-b-c-d, k-b-c+j): its first `revert_count` columns leave the learning
/// window this pass and its last `new_count` columns enter it. Base and
/// test are populated once the store holds a+b+c columns.
struct EmbeddedWindows {
    Eigen::MatrixXd learn_x;
    Eigen::MatrixXd learn_xp;
    Eigen::VectorXd learn_weights;
    int revert_count = 0;
    int new_count = 0;

    Eigen::MatrixXd base_x;
    Eigen::MatrixXd test_x;
    bool windows_ready = false;

    long long head = 0;  // global embedded column index one past the newest
    double head_timestamp = 0.0;
};

/// Rolling buffer of embedded snapshot pairs spanning at most b+c+d columns,
/// oldest evicted first. One logical owner advances it; slices returned are
/// copies, valid across later advances.
class SnapshotStore {
public:
    explicit SnapshotStore(WindowLayout layout);

    EmbeddedWindows advance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& xp,
                            const Eigen::VectorXd& weights, const std::vector<double>& timestamps);

    long long head() const { return head_; }
    int size() const { return static_cast<int>(ts_.size()); }
    int x_rows() const { return static_cast<int>(x_all_.rows()); }
    const WindowLayout& layout() const { return layout_; }

private:
    WindowLayout layout_;
    Eigen::MatrixXd x_all_;   // rows fixed after first column
    Eigen::MatrixXd xp_all_;
    Eigen::VectorXd w_;
    std::vector<double> ts_;
    long long head_ = 0;  // global index one past the newest stored column
};

/// Control handling ahead of the store: with a known control matrix B the
/// shifted snapshots are compensated (x̄' = x' - B·θ); otherwise the state
/// is augmented with the control rows (x̄ = [x; θ]).
struct PreparedPair {
    Eigen::MatrixXd x;
    Eigen::MatrixXd xp;
};
PreparedPair prepare_pair(const Eigen::MatrixXd& x_h, const Eigen::MatrixXd& xp_h,
                          const Eigen::MatrixXd& theta_h,
                          const std::optional<Eigen::MatrixXd>& known_control = std::nullopt);

}  // namespace odmdcpd
