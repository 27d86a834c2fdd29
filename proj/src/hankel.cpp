#include "odmdcpd/hankel.hpp"

namespace odmdcpd {

void HankelConfig::validate() const {
    if (delays < 0) throw ConfigError("hankel: delays must be >= 0");
    if (delay_stride < 1) throw ConfigError("hankel: delay_stride must be >= 1");
    if (delays > 0 && delays % delay_stride != 0)
        throw ConfigError("hankel: delays must be a multiple of delay_stride");
}

Hankelizer::Hankelizer(int signal_dim, HankelConfig cfg) : signal_dim_(signal_dim), cfg_(cfg) {
    cfg_.validate();
    if (signal_dim < 0) throw ConfigError("hankel: negative signal dimension");
    history_.resize(signal_dim_, cfg_.delays);
}

void Hankelizer::reset() {
    seen_ = 0;
}

Eigen::MatrixXd Hankelizer::feed(const Eigen::MatrixXd& cols) {
    if (cols.rows() != signal_dim_)
        throw ConfigError("hankel: column dimension does not match signal dimension");
    const int h = cfg_.delays;
    const int stride = cfg_.delay_stride;
    const int blocks = cfg_.rows_per_signal();

    Eigen::MatrixXd out(embedded_rows(), cols.cols());
    int emitted = 0;
    for (Eigen::Index j = 0; j < cols.cols(); ++j) {
        if (seen_ >= h) {
            // history_ holds [x_{t-h}, ..., x_{t-1}]; current column is x_t.
            for (int b = 0; b + 1 < blocks; ++b)
                out.block(b * signal_dim_, emitted, signal_dim_, 1) = history_.col(b * stride);
            out.block((blocks - 1) * signal_dim_, emitted, signal_dim_, 1) = cols.col(j);
            ++emitted;
        }
        if (h > 0) {
            if (h > 1) history_.leftCols(h - 1) = history_.rightCols(h - 1).eval();
            history_.col(h - 1) = cols.col(j);
        }
        ++seen_;
    }
    return out.leftCols(emitted);
}

Eigen::MatrixXd hankelize(const Eigen::MatrixXd& data, const HankelConfig& cfg) {
    Hankelizer hk(static_cast<int>(data.rows()), cfg);
    return hk.feed(data);
}

}  // namespace odmdcpd
