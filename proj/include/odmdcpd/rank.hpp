#pragma once

#include <Eigen/Dense>

#include "odmdcpd/errors.hpp"

namespace odmdcpd {

/// Hard-threshold rank suggestion (Gavish-Donoho, unknown noise level):
/// keep singular values above omega(beta) times the median singular value.
struct RankSuggestion {
    int rank = 0;
    double threshold = 0.0;
    double kept_energy = 0.0;  // fraction of squared singular mass retained
    bool ratio_inverted = false;  // fewer columns than rows; beta flipped
    Eigen::VectorXd singular_values;
};

RankSuggestion suggest_rank(const Eigen::MatrixXd& window);

}  // namespace odmdcpd
