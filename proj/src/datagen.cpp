#include "odmdcpd/datagen.hpp"

#include <cmath>
#include <random>

namespace odmdcpd {

GeneratedSeries generate_steps(const StepsSpec& spec) {
    if (spec.total < 1) throw ConfigError("steps: total must be >= 1");
    if (spec.noise_std < 0.0) throw ConfigError("steps: noise std must be >= 0");
    if (spec.num_steps < 0 || spec.spacing < 1) throw ConfigError("steps: bad step schedule");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    GeneratedSeries out;
    out.states.resize(1, spec.total);
    out.timestamps.resize(spec.total);
    out.controls.resize(0, spec.total);

    double level = 0.0;
    int next_step = 1;
    for (long long k = 0; k < spec.total; ++k) {
        if (next_step <= spec.num_steps && k == next_step * spec.spacing) {
            level += spec.base_step * next_step;
            out.labels.push_back(k);
            ++next_step;
        }
        const double eps = spec.noise_std > 0.0 ? spec.noise_std * noise(rng) : 0.0;
        out.states(0, k) = level + eps;
        out.timestamps[k] = static_cast<double>(k);
    }
    return out;
}

Eigen::Vector2d two_tank_derivative(const Eigen::Vector2d& levels, double inflow,
                                    const TwoTankSpec& spec) {
    const double s1 = std::sqrt(std::max(0.0, levels(0)));
    const double s2 = std::sqrt(std::max(0.0, levels(1)));
    Eigen::Vector2d d;
    d(0) = inflow - spec.k1 / spec.f1 * s1;
    d(1) = spec.k1 / spec.f2 * s1 - spec.k2 / spec.f2 * s2;
    return d;
}

GeneratedSeries simulate_two_tanks(const TwoTankSpec& spec) {
    if (spec.total < 1) throw ConfigError("two_tanks: total must be >= 1");
    if (!(spec.k1 > 0.0 && spec.k2 > 0.0 && spec.f1 > 0.0 && spec.f2 > 0.0))
        throw ConfigError("two_tanks: physical constants must be positive");
    if (spec.dt <= 0.0) throw ConfigError("two_tanks: dt must be positive");
    if (spec.delay_min < 0 || spec.delay_max < spec.delay_min)
        throw ConfigError("two_tanks: bad delay range");

    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<int> delay_dist(spec.delay_min, spec.delay_max);
    std::uniform_real_distribution<double> flow_dist(0.0, spec.control_max);
    std::normal_distribution<double> noise(0.0, std::sqrt(spec.noise_var));

    const int tau = delay_dist(rng);

    GeneratedSeries out;
    out.states.resize(2, spec.total);
    out.controls.resize(1, spec.total);
    out.timestamps.resize(spec.total);

    // Commanded inflow: piecewise constant, redrawn from (0, control_max]
    // at every epoch boundary.
    std::vector<double> command(spec.total);
    double level_cmd = 0.0;
    for (long long k = 0; k < spec.total; ++k) {
        if (k % spec.control_epoch == 0) {
            double draw = flow_dist(rng);
            if (draw == 0.0) draw = spec.control_max;  // interval is open at 0
            level_cmd = draw;
        }
        command[k] = level_cmd;
    }

    Eigen::Vector2d h = Eigen::Vector2d::Zero();
    for (long long k = 0; k < spec.total; ++k) {
        // Observe, then integrate to the next sample. Faults distort the
        // observation channel; the gain fault distorts the plant input.
        double obs1 = h(0), obs2 = h(1);
        if (spec.with_noise && spec.noise_var > 0.0) {
            obs1 += noise(rng);
            obs2 += noise(rng);
        }
        if (spec.with_faults) {
            if (k >= spec.bias_start && k < spec.bias_end) {
                obs1 += spec.bias_size;
                obs2 += spec.bias_size;
            }
            if (k >= spec.trend_start) {
                const double drift = spec.trend_slope * static_cast<double>(k - spec.trend_start);
                obs1 += drift;
                obs2 += drift;
            }
        }
        out.states(0, k) = obs1;
        out.states(1, k) = obs2;
        out.controls(0, k) = command[k];
        out.timestamps[k] = static_cast<double>(k) * spec.dt;

        // Sample-and-hold delayed inflow over the RK4 step.
        const long long src = k - tau;
        double inflow = src >= 0 ? command[src] : 0.0;
        if (spec.with_faults && k >= spec.gain_start && k < spec.gain_end)
            inflow *= spec.gain_factor;

        const Eigen::Vector2d k1 = two_tank_derivative(h, inflow, spec);
        const Eigen::Vector2d k2 = two_tank_derivative(h + 0.5 * spec.dt * k1, inflow, spec);
        const Eigen::Vector2d k3 = two_tank_derivative(h + 0.5 * spec.dt * k2, inflow, spec);
        const Eigen::Vector2d k4 = two_tank_derivative(h + spec.dt * k3, inflow, spec);
        h += spec.dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        h = h.cwiseMax(0.0);
    }

    if (spec.with_faults) {
        out.labels = {spec.bias_start, spec.gain_start, spec.trend_start};
        out.label_ends = {spec.bias_end, spec.gain_end};
    }
    return out;
}

}  // namespace odmdcpd
