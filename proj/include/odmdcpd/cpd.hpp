#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "odmdcpd/hankel.hpp"
#include "odmdcpd/online_dmd.hpp"
#include "odmdcpd/online_svd.hpp"
#include "odmdcpd/stream.hpp"

namespace odmdcpd {

enum class ScoreMode { Ratio, Difference, Both };

/// Basis used for the detection projector: the leading POD directions of
/// the tracked subspace (default), or a basis orthonormalized from the DMD
/// modes (experimental alternative).
enum class ScoreBasis { PodSubspace, DmdModes };

struct CpdConfig {
    WindowLayout layout;
    HankelConfig hankel;
    int rank_state = 1;    // p
    int rank_control = 0;  // q
    double threshold = 0.0;
    ScoreMode score_mode = ScoreMode::Both;
    ScoreBasis score_basis = ScoreBasis::PodSubspace;
    double rho = 1e4;
    double svd_tol = -1.0;  // < 0: 1e-10 * sqrt(embedded rows)
    std::optional<Eigen::MatrixXd> control_matrix;  // embedded B for compensation

    void validate(int state_dim, int control_dim) const;
};

/// One detection output. `step` is the raw stream index of the newest
/// snapshot in the test window.
struct CpdScore {
    long long step = 0;
    double timestamp = 0.0;
    double base_error = 0.0;  // E_B
    double test_error = 0.0;  // E_T
    double ratio = 0.0;       // max(0, E_T/E_B - 1)
    double difference = 0.0;  // E_T - E_B, sign preserved
    bool alarm = false;
    bool degenerate_base = false;
};

/// Score arithmetic for given window errors. `base_scale` is the mean
/// squared column norm of the base window, used to floor a vanishing E_B.
CpdScore score_from_errors(long long step, double timestamp, double base_error,
                           double test_error, double base_scale, double threshold);

enum class PassOp { Detect, SvdInit, SvdRevert, SvdUpdate, DmdRevert, DmdUpdate, Align };
using PassObserver = std::function<void(long long step, PassOp)>;

/// Streaming change-point detector: delay-embeds the input stream, keeps a
/// rolling snapshot store, tracks the subspace with an online SVD and the
/// reduced operator with online DMD over the lagged learning window, and
/// scores each step by comparing base- and test-window reconstruction
/// errors. Detection runs before learning within every pass. One instance
/// per stream; passes are strictly sequential.
class CpdEngine {
public:
    CpdEngine(int state_dim, int control_dim, CpdConfig cfg);

    /// Feeds one snapshot pair (plus control); returns a score once warm.
    std::optional<CpdScore> step(const Eigen::VectorXd& state, const Eigen::VectorXd& state_next,
                                 const Eigen::VectorXd& control, double timestamp,
                                 double weight = 1.0);

    /// Feeds a mini-batch; columns are processed in order, so a batch replay
    /// emits exactly the same scores as a column-by-column replay. Batches
    /// larger than the test window are rejected.
    std::vector<CpdScore> step_batch(const RawBatch& batch);

    bool warm() const { return svd_.has_value(); }
    const CpdConfig& config() const { return cfg_; }
    int embedded_state_rows() const { return hank_x_.embedded_rows(); }
    int embedded_rows() const;
    long long raw_columns_seen() const { return raw_seen_; }

    const OnlineSvd* svd() const { return svd_ ? &*svd_ : nullptr; }
    const OnlineDmd& dmd() const { return dmd_; }

    /// Projection basis the detector currently uses (empty before warm-up).
    Eigen::MatrixXd score_basis_matrix() const;

    void set_observer(PassObserver obs) { observer_ = std::move(obs); }

private:
    void learn(const EmbeddedWindows& win);
    CpdScore detect(const EmbeddedWindows& win) const;
    void notify(long long step, PassOp op) const;

    CpdConfig cfg_;
    int state_dim_;
    int control_dim_;
    int min_learn_cols_;
    Hankelizer hank_x_;
    Hankelizer hank_xp_;
    Hankelizer hank_theta_;
    SnapshotStore store_;
    std::optional<OnlineSvd> svd_;
    OnlineDmd dmd_;
    Eigen::MatrixXd init_x_, init_xp_;
    Eigen::VectorXd init_w_;
    long long raw_seen_ = 0;
    PassObserver observer_;
};

/// Expands a raw control matrix (m x l) to the embedded block-diagonal form
/// expected by `CpdConfig::control_matrix`.
Eigen::MatrixXd expand_control_matrix(const Eigen::MatrixXd& raw, const HankelConfig& cfg);

}  // namespace odmdcpd
