#pragma once

// Shared test utilities: independent oracles kept deliberately separate from
// the library's implementation paths.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "armo/robot_model.hpp"
#include "armo/types.hpp"

namespace testutil {

// Forward kinematics oracle built from homogeneous transforms composed with
// Eigen::AngleAxis, independent of the library's closed-form expressions.
struct FkOracle {
    armo::Vec3 elbow;
    armo::Vec3 wrist;
    armo::Vec3 tool;
};

inline FkOracle fk_oracle(const armo::RobotModel& m, const armo::JointVector& q) {
    using Eigen::AngleAxisd;
    using Eigen::Translation3d;
    using Eigen::Vector3d;

    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t = t * Translation3d(0, 0, m.base_height) * AngleAxisd(q[0], Vector3d::UnitZ()) *
        AngleAxisd(q[1], Vector3d::UnitY());
    FkOracle out;
    out.elbow = t * Vector3d(0, 0, m.upper_link);
    t = t * Translation3d(0, 0, m.upper_link) * AngleAxisd(q[2], Vector3d::UnitY());
    out.wrist = t * Vector3d(0, 0, m.fore_link);
    t = t * Translation3d(0, 0, m.fore_link) * AngleAxisd(q[3], Vector3d::UnitY()) *
        AngleAxisd(q[4], Vector3d::UnitZ()) * AngleAxisd(q[5], Vector3d::UnitX());
    out.tool = t * Vector3d(m.tool_offset, 0, 0);
    return out;
}

// Exhaustive warping-path enumeration for small sequences. Minimizes the
// cumulative cost summed in path order; cost ties resolve to the longest
// path, mirroring the library's tie rule.
struct DtwOracleResult {
    double cost = std::numeric_limits<double>::infinity();
    int length = 0;
};

inline void dtw_enumerate(const std::vector<armo::Vec3>& a,
                          const std::vector<armo::Vec3>& b, std::size_t i,
                          std::size_t j, double acc, int len, DtwOracleResult& best) {
    acc += (a[i] - b[j]).norm();
    ++len;
    if (i + 1 == a.size() && j + 1 == b.size()) {
        if (acc < best.cost || (acc == best.cost && len > best.length)) {
            best.cost = acc;
            best.length = len;
        }
        return;
    }
    if (i + 1 < a.size()) dtw_enumerate(a, b, i + 1, j, acc, len, best);
    if (j + 1 < b.size()) dtw_enumerate(a, b, i, j + 1, acc, len, best);
    if (i + 1 < a.size() && j + 1 < b.size())
        dtw_enumerate(a, b, i + 1, j + 1, acc, len, best);
}

inline double dtw_bruteforce(const std::vector<armo::Vec3>& a,
                             const std::vector<armo::Vec3>& b) {
    DtwOracleResult best;
    dtw_enumerate(a, b, 0, 0, 0.0, 0, best);
    return best.cost / best.length;
}

// Closed-form rest-to-rest trapezoidal duration for a straight 1-DOF path.
inline double trapezoid_duration(double distance, double v_max, double a_max) {
    const double d_ramp = v_max * v_max / a_max;  // accel + decel distance
    if (distance <= d_ramp) return 2.0 * std::sqrt(distance / a_max);
    return 2.0 * (v_max / a_max) + (distance - d_ramp) / v_max;
}

}  // namespace testutil
