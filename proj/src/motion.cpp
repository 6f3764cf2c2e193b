#include "hbtrack/motion.hpp"

#include <cmath>
#include <stdexcept>

namespace hbtrack::kalman {
namespace {

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat48 = Eigen::Matrix<double, 4, 8>;

Mat8 transition() {
    Mat8 f = Mat8::Identity();
    for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
    return f;
}

Mat48 measurement_model() {
    Mat48 h = Mat48::Zero();
    for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
    return h;
}

Vec4 box_to_measurement(const BBox& box) {
    if (!box_is_valid(box)) throw std::invalid_argument("kalman: invalid box");
    Vec4 z;
    z << box.cx(), box.cy(), box.w / box.h, box.h;
    return z;
}

}  // namespace

MotionState initiate(const BBox& box, const MotionNoise& noise) {
    MotionState s;
    s.mean.head<4>() = box_to_measurement(box);

    const double h = box.h;
    Vec8 std;
    std << 2.0 * noise.position_weight * h, 2.0 * noise.position_weight * h, noise.aspect_init_std,
        2.0 * noise.position_weight * h, 10.0 * noise.velocity_weight * h,
        10.0 * noise.velocity_weight * h, noise.aspect_vel_init_std, 10.0 * noise.velocity_weight * h;
    s.covariance = std.array().square().matrix().asDiagonal();
    return s;
}

MotionState predict(const MotionState& state, const MotionNoise& noise) {
    const Mat8 f = transition();
    const double h = state.mean(3);

    Vec8 std;
    std << noise.position_weight * h, noise.position_weight * h, noise.aspect_process_std,
        noise.position_weight * h, noise.velocity_weight * h, noise.velocity_weight * h,
        noise.aspect_vel_process_std, noise.velocity_weight * h;
    const Mat8 q = std.array().square().matrix().asDiagonal();

    MotionState out;
    out.mean = f * state.mean;
    out.covariance = f * state.covariance * f.transpose() + q;
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
    return out;
}

MotionState update(const MotionState& state, const BBox& measurement, const MotionNoise& noise) {
    const Mat48 hm = measurement_model();
    const Vec4 z = box_to_measurement(measurement);

    const double h = measurement.h;
    Vec4 std;
    std << noise.position_weight * h, noise.position_weight * h, noise.aspect_measure_std,
        noise.position_weight * h;
    const Mat4 r = std.array().square().matrix().asDiagonal();

    const Mat4 s = hm * state.covariance * hm.transpose() + r;
    const Eigen::Matrix<double, 8, 4> gain =
        s.ldlt().solve(hm * state.covariance).transpose();

    MotionState out;
    out.mean = state.mean + gain * (z - hm * state.mean);
    // Joseph form keeps the covariance PSD under roundoff.
    const Mat8 ikh = Mat8::Identity() - gain * hm;
    out.covariance = ikh * state.covariance * ikh.transpose() + gain * r * gain.transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
    return out;
}

BBox to_box(const MotionState& state) {
    BBox b;
    b.h = state.mean(3);
    b.w = state.mean(2) * state.mean(3);
    b.x = state.mean(0) - 0.5 * b.w;
    b.y = state.mean(1) - 0.5 * b.h;
    b.score = 1.0;
    return b;
}

bool is_psd(const MotionState& state, double tol) {
    const Mat8& p = state.covariance;
    if (((p - p.transpose()).array().abs() > tol).any()) return false;
    Eigen::SelfAdjointEigenSolver<Mat8> eig(p);
    return eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() >= -tol;
}

}  // namespace hbtrack::kalman
