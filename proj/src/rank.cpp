#include "odmdcpd/rank.hpp"

#include <algorithm>
#include <cmath>

namespace odmdcpd {

RankSuggestion suggest_rank(const Eigen::MatrixXd& window) {
    if (window.rows() < 1 || window.cols() < 1)
        throw ConfigError("suggest_rank: empty window");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(window);
    RankSuggestion out;
    out.singular_values = svd.singularValues();
    out.ratio_inverted = window.cols() < window.rows();

    const double lo = static_cast<double>(std::min(window.rows(), window.cols()));
    const double hi = static_cast<double>(std::max(window.rows(), window.cols()));
    const double beta = lo / hi;
    const double omega = 0.56 * beta * beta * beta - 0.95 * beta * beta + 1.82 * beta + 1.43;

    const Eigen::Index n = out.singular_values.size();
    Eigen::VectorXd sorted = out.singular_values;  // already descending
    const double median = n % 2 == 1 ? sorted(n / 2) : 0.5 * (sorted(n / 2 - 1) + sorted(n / 2));
    out.threshold = omega * median;

    int rank = 0;
    double kept = 0.0, total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = sorted(i) * sorted(i);
        total += e;
        if (sorted(i) > out.threshold) {
            ++rank;
            kept += e;
        }
    }
    if (rank == 0) {  // nothing clears the threshold; report the top direction
        rank = 1;
        kept = sorted(0) * sorted(0);
    }
    out.rank = rank;
    out.kept_energy = total > 0.0 ? kept / total : 0.0;
    return out;
}

}  // namespace odmdcpd
