#pragma once

#include "armo/robot_model.hpp"
#include "armo/types.hpp"

namespace armo {

/// World positions of the arm's reference points for one configuration.
/// base = point A (world origin), elbow = point B, wrist = point C,
/// tool = point D. Zero configuration points the arm straight up with the
/// tool facing world +x.
struct FkResult {
    Vec3 base;
    Vec3 shoulder;
    Vec3 elbow;
    Vec3 wrist;
    Vec3 tool;
    Eigen::Matrix3d tool_rotation;
};

FkResult forward_kinematics(const RobotModel& model, const JointVector& q);

/// Analytic solutions of the first three joints for a wrist-center target.
/// `candidates` holds every in-limit solution (base direct/flipped x elbow
/// up/down, wrapped to (-pi, pi]); `singular` marks targets on the base axis,
/// where theta1 is indeterminate and reported as 0.
struct IkResult {
    std::vector<Vec3> candidates;  // (theta1, theta2, theta3)
    bool singular = false;
};

/// Throws DomainError(Unreachable) when the target lies outside the annulus
/// of the shoulder-elbow-wrist subchain or no solution respects the limits.
IkResult ik_wrist_center(const RobotModel& model, const Vec3& target);

bool wrist_center_reachable(const RobotModel& model, const Vec3& target);

/// Nearest reachable point to `target` along the ray from the world origin
/// through `target`, kept a `band` fraction inside the workspace boundary.
Vec3 clamp_to_workspace(const RobotModel& model, const Vec3& target,
                        double band = 0.999);

/// Wrist angles that keep the end effector facing forward:
/// theta4 = -(theta2 + theta3), theta5 = -theta1 (theta6 is 0 by convention).
std::pair<double, double> wrist_forward_angles(double theta1, double theta2,
                                               double theta3);

/// Completes (theta1..theta3) into a full configuration with the
/// forward-facing wrist convention.
JointVector with_forward_wrist(const Vec3& arm_angles);

/// Normalize to (-pi, pi].
double wrap_angle(double angle);

/// Smallest signed difference a-b on the circle, in (-pi, pi].
double angle_difference(double a, double b);

}  // namespace armo
