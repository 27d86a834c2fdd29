#pragma once

#include <string_view>
#include <vector>

#include "odmdcpd/cpd.hpp"
#include "odmdcpd/errors.hpp"

namespace odmdcpd {

/// NAB application profile weights. True-positive credit is positive;
/// false-positive and false-negative penalties are nonpositive.
struct NabProfile {
    double tp_weight = 1.0;
    double fp_weight = -0.11;
    double fn_weight = -1.0;

    static NabProfile standard() { return {1.0, -0.11, -1.0}; }
    static NabProfile low_fp() { return {1.0, -0.22, -1.0}; }
    static NabProfile low_fn() { return {1.0, -0.11, -2.0}; }
    static NabProfile by_name(std::string_view name);

    void validate() const;
};

/// Alarms and labels to score. Each label opens a window [label, label+L):
/// detection credit is only available to the right of the change point, and
/// alarms ahead of a window count as false positives.
struct ScoringRun {
    std::vector<long long> alarms;
    std::vector<long long> labels;
    long long window_length = 1;
};

/// Normalized NAB score: 0 for the null detector, 100 for alarms placed
/// exactly at every window start. The earliest alarm inside a window earns
/// sigmoidal positional credit (largest at the window start); later
/// in-window alarms are ignored.
double nab_score(const ScoringRun& run, const NabProfile& profile);

/// Convention for the default scoring window length: a tenth of the span
/// per label.
long long default_window_length(long long span, std::size_t num_labels);

struct ThresholdSweep {
    double best_threshold = 0.0;
    double best_score = 0.0;
    std::vector<std::pair<double, double>> curve;  // (threshold, score)
};

/// Evaluates nab_score over a grid of thresholds applied to the score
/// stream; alarms are the steps whose statistic exceeds the threshold.
ThresholdSweep sweep_threshold(const std::vector<CpdScore>& scores,
                               const std::vector<long long>& labels, const NabProfile& profile,
                               long long window_length, int max_grid = 201,
                               bool use_difference = false);

}  // namespace odmdcpd
