#pragma once

#include <Eigen/Dense>

#include "odmdcpd/errors.hpp"

namespace odmdcpd {

/// Time-delay embedding parameters, both in snapshots. `delays` (h) is the
/// total depth, `delay_stride` (h_d) the sampling stride within the delay
/// span. Each raw signal contributes h/h_d + 1 rows to the embedded vector;
/// h = 0 disables the embedding.
struct HankelConfig {
    int delays = 0;
    int delay_stride = 1;

    void validate() const;
    int rows_per_signal() const { return delays / delay_stride + 1; }
};

/// Streaming delay embedder. Keeps the last h raw columns of one signal
/// group and, for every incoming column x_t with full history, emits
/// [x_{t-h}; x_{t-h+h_d}; ...; x_t] (oldest block on top).
class Hankelizer {
public:
    Hankelizer(int signal_dim, HankelConfig cfg);

    /// Feeds j raw columns, returns the embedded columns that are warm.
    /// During warm-up fewer (possibly zero) columns come back.
    Eigen::MatrixXd feed(const Eigen::MatrixXd& cols);

    bool warm() const { return seen_ >= cfg_.delays; }
    int signal_dim() const { return signal_dim_; }
    int embedded_rows() const { return signal_dim_ * cfg_.rows_per_signal(); }
    long long columns_seen() const { return seen_; }
    void reset();

private:
    int signal_dim_;
    HankelConfig cfg_;
    Eigen::MatrixXd history_;  // signal_dim x delays, oldest column first
    long long seen_ = 0;
};

/// One-shot embedding of a complete matrix. The first h columns lack
/// history and are dropped, so the result has n - h columns.
Eigen::MatrixXd hankelize(const Eigen::MatrixXd& data, const HankelConfig& cfg);

}  // namespace odmdcpd
