#include "odmdcpd/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace odmdcpd {

namespace {

// NAB scaled sigmoid: ~0.9866 at the window start (y = -1), 0 at the end.
double scaled_sigmoid(double y) {
    return 2.0 / (1.0 + std::exp(5.0 * y)) - 1.0;
}

struct Window {
    long long begin;
    long long end;  // exclusive
};

std::vector<Window> build_windows(const std::vector<long long>& labels, long long len) {
    std::vector<Window> windows;
    for (long long lab : labels) {
        const Window w{lab, lab + len};
        if (!windows.empty() && w.begin < windows.back().end)
            windows.back().end = std::max(windows.back().end, w.end);  // merge overlap
        else
            windows.push_back(w);
    }
    return windows;
}

}  // namespace

NabProfile NabProfile::by_name(std::string_view name) {
    if (name == "standard") return standard();
    if (name == "lowFP" || name == "low_fp") return low_fp();
    if (name == "lowFN" || name == "low_fn") return low_fn();
    throw ConfigError("nab: unknown profile '" + std::string(name) + "'");
}

void NabProfile::validate() const {
    if (!(tp_weight > 0.0)) throw ConfigError("nab: tp weight must be positive");
    if (fp_weight > 0.0 || fn_weight > 0.0)
        throw ConfigError("nab: fp/fn weights must be nonpositive");
}

long long default_window_length(long long span, std::size_t num_labels) {
    if (num_labels == 0) throw ConfigError("nab: no labels");
    return std::max<long long>(1, span / static_cast<long long>(10 * num_labels));
}

double nab_score(const ScoringRun& run, const NabProfile& profile) {
    profile.validate();
    if (run.labels.empty()) throw ConfigError("nab: scoring requires at least one label");
    if (run.window_length < 1) throw ConfigError("nab: window length must be >= 1");
    if (!std::is_sorted(run.labels.begin(), run.labels.end()))
        throw ConfigError("nab: labels must be sorted");

    const std::vector<Window> windows = build_windows(run.labels, run.window_length);

    std::vector<long long> alarms = run.alarms;
    std::sort(alarms.begin(), alarms.end());

    double raw = 0.0;
    std::size_t wi = 0;
    std::vector<bool> hit(windows.size(), false);
    for (long long alarm : alarms) {
        while (wi < windows.size() && alarm >= windows[wi].end) ++wi;
        if (wi < windows.size() && alarm >= windows[wi].begin) {
            if (!hit[wi]) {
                hit[wi] = true;
                const double width = static_cast<double>(windows[wi].end - windows[wi].begin);
                const double y = static_cast<double>(alarm - windows[wi].end) / width;
                raw += profile.tp_weight * scaled_sigmoid(y);
            }
            // later alarms inside a credited window are ignored
        } else {
            raw += profile.fp_weight;
        }
    }
    for (bool h : hit)
        if (!h) raw += profile.fn_weight;

    const double null_score = static_cast<double>(windows.size()) * profile.fn_weight;
    const double perfect = static_cast<double>(windows.size()) * profile.tp_weight * scaled_sigmoid(-1.0);
    return 100.0 * (raw - null_score) / (perfect - null_score);
}

ThresholdSweep sweep_threshold(const std::vector<CpdScore>& scores,
                               const std::vector<long long>& labels, const NabProfile& profile,
                               long long window_length, int max_grid, bool use_difference) {
    std::set<double> candidates{0.0};
    for (const CpdScore& s : scores) {
        const double v = use_difference ? s.difference : s.ratio;
        if (v > 0.0) candidates.insert(v);
    }

    std::vector<double> grid(candidates.begin(), candidates.end());
    if (static_cast<int>(grid.size()) > max_grid) {
        std::vector<double> sub;
        sub.reserve(max_grid);
        const double step = static_cast<double>(grid.size() - 1) / (max_grid - 1);
        for (int i = 0; i < max_grid; ++i)
            sub.push_back(grid[static_cast<std::size_t>(std::llround(i * step))]);
        sub.erase(std::unique(sub.begin(), sub.end()), sub.end());
        grid = std::move(sub);
    }

    ThresholdSweep out;
    out.best_score = -std::numeric_limits<double>::infinity();
    for (double t : grid) {
        ScoringRun run;
        run.labels = labels;
        run.window_length = window_length;
        for (const CpdScore& s : scores) {
            const double v = use_difference ? s.difference : s.ratio;
            if (v > t) run.alarms.push_back(s.step);
        }
        const double score = nab_score(run, profile);
        out.curve.emplace_back(t, score);
        if (score > out.best_score) {
            out.best_score = score;
            out.best_threshold = t;
        }
    }
    return out;
}

}  // namespace odmdcpd
