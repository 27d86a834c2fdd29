#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "odmdcpd/errors.hpp"

namespace odmdcpd {

/// Piecewise-constant scalar stream: steps of increasing size and distance
/// from the starting operating point every `spacing` snapshots, plus
/// Gaussian noise.
struct StepsSpec {
    long long total = 10000;
    int num_steps = 9;
    long long spacing = 1000;
    double base_step = 0.5;  // step i jumps by base_step * i
    double noise_std = 0.1;
    std::uint64_t seed = 0;
};

struct GeneratedSeries {
    Eigen::MatrixXd states;    // m x n observations
    Eigen::MatrixXd controls;  // l x n (zero rows when autonomous)
    std::vector<double> timestamps;
    std::vector<long long> labels;      // change-point onsets
    std::vector<long long> label_ends;  // fault window ends, where applicable
};

GeneratedSeries generate_steps(const StepsSpec& spec);

/// Two connected tanks with a delayed inflow command, integrated with
/// fixed-step RK4; the commanded flow steps to a random level every
/// `control_epoch` samples. Faults: an observation bias window, a doubled
/// plant response to the command, and a linear observation trend.
struct TwoTankSpec {
    long long total = 12000;
    double dt = 10.0;  // 0.1 Hz sampling
    double k1 = 0.02, k2 = 0.02;
    double f1 = 1.0, f2 = 1.0;
    int delay_min = 20, delay_max = 30;  // input delay, in samples
    long long control_epoch = 200;
    double control_max = 0.03;
    double noise_var = 0.35;
    long long bias_start = 4000, bias_end = 5000;
    double bias_size = 1.0;
    long long gain_start = 7600, gain_end = 8600;
    double gain_factor = 2.0;
    long long trend_start = 9800;
    double trend_slope = 0.002;
    bool with_noise = true;
    bool with_faults = true;
    std::uint64_t seed = 0;
};

GeneratedSeries simulate_two_tanks(const TwoTankSpec& spec);

/// Plant derivative of the two-tank system for a held delayed inflow.
Eigen::Vector2d two_tank_derivative(const Eigen::Vector2d& levels, double inflow,
                                    const TwoTankSpec& spec);

}  // namespace odmdcpd
