#include "armo/kinematics.hpp"

#include <algorithm>
#include <cmath>

namespace armo {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kAxisTol = 1e-9;  // radial distance below which theta1 is indeterminate

// Unit direction of a link pitched by `alpha` from vertical inside the plane
// selected by base yaw `yaw`. alpha = 0 points straight up, alpha = pi/2
// points horizontally outward.
Vec3 pitched_direction(double yaw, double alpha) {
    const double s = std::sin(alpha);
    return Vec3(std::cos(yaw) * s, std::sin(yaw) * s, std::cos(alpha));
}

Eigen::Matrix3d rot_z(double a) {
    Eigen::Matrix3d r;
    const double c = std::cos(a), s = std::sin(a);
    r << c, -s, 0, s, c, 0, 0, 0, 1;
    return r;
}

Eigen::Matrix3d rot_y(double a) {
    Eigen::Matrix3d r;
    const double c = std::cos(a), s = std::sin(a);
    r << c, 0, s, 0, 1, 0, -s, 0, c;
    return r;
}

Eigen::Matrix3d rot_x(double a) {
    Eigen::Matrix3d r;
    const double c = std::cos(a), s = std::sin(a);
    r << 1, 0, 0, 0, c, -s, 0, s, c;
    return r;
}

// Planar two-link solutions for a target expressed in the yaw plane as
// (radial, vertical-from-shoulder). Appends up to two (theta2, theta3) pairs;
// returns false when the target lies outside the annulus.
bool planar_solutions(const RobotModel& m, double radial, double vertical,
                      std::vector<std::pair<double, double>>& out) {
    const double l2 = m.upper_link, l3 = m.fore_link;
    const double d2 = radial * radial + vertical * vertical;
    double c3 = (d2 - l2 * l2 - l3 * l3) / (2.0 * l2 * l3);
    if (c3 > 1.0 + 1e-9 || c3 < -1.0 - 1e-9) return false;
    c3 = std::clamp(c3, -1.0, 1.0);
    const double theta3_mag = std::acos(c3);
    for (double theta3 : {theta3_mag, -theta3_mag}) {
        const double k1 = l2 + l3 * std::cos(theta3);
        const double k2 = l3 * std::sin(theta3);
        const double theta2 = std::atan2(radial, vertical) - std::atan2(k2, k1);
        out.emplace_back(theta2, theta3);
        if (theta3_mag < 1e-12) break;  // straight arm: both branches coincide
    }
    return true;
}

bool arm_angles_within_limits(const RobotModel& m, const Vec3& a) {
    for (int i = 0; i < 3; ++i)
        if (a[i] < m.joint_limits(i, 0) || a[i] > m.joint_limits(i, 1)) return false;
    return true;
}

}  // namespace

double wrap_angle(double angle) {
    double x = std::fmod(angle + kPi, 2.0 * kPi);
    if (x <= 0.0) x += 2.0 * kPi;
    return x - kPi;
}

double angle_difference(double a, double b) { return wrap_angle(a - b); }

FkResult forward_kinematics(const RobotModel& model, const JointVector& q) {
    FkResult r;
    r.base = Vec3::Zero();
    r.shoulder = Vec3(0.0, 0.0, model.base_height);
    r.elbow = r.shoulder + model.upper_link * pitched_direction(q[0], q[1]);
    r.wrist = r.elbow + model.fore_link * pitched_direction(q[0], q[1] + q[2]);
    r.tool_rotation = rot_z(q[0]) * rot_y(q[1] + q[2] + q[3]) * rot_z(q[4]) * rot_x(q[5]);
    r.tool = r.wrist + r.tool_rotation * Vec3(model.tool_offset, 0.0, 0.0);
    return r;
}

IkResult ik_wrist_center(const RobotModel& model, const Vec3& target) {
    if (!target.allFinite())
        throw DomainError(ErrorCode::InvalidArgument, "ik target must be finite");

    const double radial = std::hypot(target.x(), target.y());
    const double vertical = target.z() - model.base_height;

    IkResult result;
    std::vector<std::pair<double, double>> planar;
    bool geometric = false;

    if (radial < kAxisTol) {
        // On the base axis every yaw works; report the canonical theta1 = 0.
        result.singular = true;
        geometric = planar_solutions(model, 0.0, vertical, planar);
        for (const auto& [t2, t3] : planar) {
            Vec3 cand(0.0, wrap_angle(t2), wrap_angle(t3));
            if (arm_angles_within_limits(model, cand)) result.candidates.push_back(cand);
        }
    } else {
        const double yaw = std::atan2(target.y(), target.x());
        for (double sign : {1.0, -1.0}) {
            planar.clear();
            if (!planar_solutions(model, sign * radial, vertical, planar)) continue;
            geometric = true;
            const double t1 = wrap_angle(sign > 0 ? yaw : yaw + kPi);
            for (const auto& [t2, t3] : planar) {
                Vec3 cand(t1, wrap_angle(t2), wrap_angle(t3));
                if (arm_angles_within_limits(model, cand)) result.candidates.push_back(cand);
            }
        }
    }

    if (!geometric)
        throw DomainError(ErrorCode::Unreachable,
                          "wrist-center target outside the reachable annulus");

    // Drop duplicates produced by coincident branches.
    std::vector<Vec3> unique;
    for (const auto& c : result.candidates) {
        bool seen = false;
        for (const auto& u : unique)
            if ((c - u).lpNorm<Eigen::Infinity>() < 1e-12) { seen = true; break; }
        if (!seen) unique.push_back(c);
    }
    result.candidates = std::move(unique);

    if (result.candidates.empty())
        throw DomainError(ErrorCode::Unreachable,
                          "no in-limit solution for wrist-center target");
    return result;
}

bool wrist_center_reachable(const RobotModel& model, const Vec3& target) {
    const double radial = std::hypot(target.x(), target.y());
    const double vertical = target.z() - model.base_height;
    const double d = std::hypot(radial, vertical);
    const double inner = std::abs(model.upper_link - model.fore_link);
    const double outer = model.upper_link + model.fore_link;
    return d >= inner - 1e-12 && d <= outer + 1e-12;
}

Vec3 clamp_to_workspace(const RobotModel& model, const Vec3& target, double band) {
    const Vec3 shoulder(0.0, 0.0, model.base_height);
    const double d = (target - shoulder).norm();
    const double inner = std::abs(model.upper_link - model.fore_link);
    const double outer = model.upper_link + model.fore_link;

    double wanted;
    if (d > outer)
        wanted = band * outer;
    else if (d < inner)
        wanted = std::min(inner / band, 0.5 * (inner + outer));
    else
        return target;

    // Points t * target lie on the ray through the origin; pick the sphere
    // intersection ||t*target - shoulder|| = wanted closest to t = 1.
    const double a = target.squaredNorm();
    if (a < 1e-18) return target;  // the origin itself is reachable
    const double b = -2.0 * target.dot(shoulder);
    const double c = shoulder.squaredNorm() - wanted * wanted;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) {
        // Ray misses the sphere (non-canonical geometry); project from the shoulder.
        return shoulder + (target - shoulder) * (wanted / std::max(d, 1e-12));
    }
    const double sq = std::sqrt(disc);
    const double t1 = (-b - sq) / (2.0 * a);
    const double t2 = (-b + sq) / (2.0 * a);
    double best = t2;
    if (t1 >= 0.0 && std::abs(t1 - 1.0) < std::abs(t2 - 1.0)) best = t1;
    if (best < 0.0) best = std::max(t1, t2);
    return best * target;
}

std::pair<double, double> wrist_forward_angles(double theta1, double theta2,
                                               double theta3) {
    return {-(theta2 + theta3), -theta1};
}

JointVector with_forward_wrist(const Vec3& arm_angles) {
    auto [theta4, theta5] =
        wrist_forward_angles(arm_angles[0], arm_angles[1], arm_angles[2]);
    JointVector q;
    q << arm_angles[0], arm_angles[1], arm_angles[2], wrap_angle(theta4),
        wrap_angle(theta5), 0.0;
    return q;
}

}  // namespace armo
