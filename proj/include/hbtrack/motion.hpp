#pragma once

#include <Eigen/Dense>

#include "hbtrack/geometry.hpp"

namespace hbtrack::kalman {

/// Constant-velocity filter state over (cx, cy, aspect, height) and their
/// per-frame velocities. Covariance stays symmetric positive semi-definite
/// under predict/update.
struct MotionState {
    Eigen::Matrix<double, 8, 1> mean = Eigen::Matrix<double, 8, 1>::Zero();
    Eigen::Matrix<double, 8, 8> covariance = Eigen::Matrix<double, 8, 8>::Zero();
};

/// Noise scales relative to box height, the convention of cascade-matching
/// trackers. All constants configurable.
struct MotionNoise {
    double position_weight = 1.0 / 20.0;
    double velocity_weight = 1.0 / 160.0;
    double aspect_init_std = 1e-2;
    double aspect_vel_init_std = 1e-5;
    double aspect_process_std = 1e-2;
    double aspect_vel_process_std = 1e-5;
    double aspect_measure_std = 1e-1;
};

MotionState initiate(const BBox& box, const MotionNoise& noise = {});
MotionState predict(const MotionState& state, const MotionNoise& noise = {});
MotionState update(const MotionState& state, const BBox& measurement, const MotionNoise& noise = {});

/// Box implied by the state mean; score is set to 1.
BBox to_box(const MotionState& state);

/// Symmetry plus eigenvalues >= -tol.
bool is_psd(const MotionState& state, double tol = 1e-9);

}  // namespace hbtrack::kalman
