#pragma once

#include <filesystem>

#include "armo/types.hpp"

namespace armo {

/// One collision sphere attached to a link of the arm. `offset` is expressed
/// in the link frame (origin at the link's proximal joint, z along the link
/// axis; the tool link uses its forward axis). Links: 0 = base column,
/// 1 = upper link, 2 = fore link, 3 = tool.
struct CollisionSphere {
    int link = 0;
    Vec3 offset = Vec3::Zero();
    double radius = 0.03;
};

/// Geometry, limits and collision layout of the canonical 6-DOF desktop arm.
/// Lengths in meters, angles in radians, SI units throughout.
struct RobotModel {
    double base_height = 0.13;   // base mount to shoulder
    double upper_link = 0.11;    // shoulder to elbow (ends at point B)
    double fore_link = 0.096;    // elbow to wrist center (ends at point C)
    double tool_offset = 0.05;   // wrist center to end effector (point D)

    Eigen::Matrix<double, 6, 2> joint_limits;  // column 0 = min, column 1 = max
    JointVector vel_limits;
    JointVector acc_limits;

    std::vector<CollisionSphere> collision_spheres;
    double collision_margin = 0.005;
    bool ground_plane = true;

    RobotModel();

    /// Canonical desk-arm model: 280 mm reach class, ±2.88 rad joints,
    /// 2.5 rad/s and 5 rad/s² limits, three spheres per link.
    static RobotModel canonical();

    /// Horizontal reach of the wrist center from the shoulder.
    double reach() const { return upper_link + fore_link; }

    bool within_limits(const JointVector& q) const;
    JointVector clamp_to_limits(const JointVector& q) const;

    /// Throws DomainError(InvalidModel) when an invariant is broken.
    void validate() const;
};

RobotModel load_robot_model(const std::filesystem::path& file);
void save_robot_model(const RobotModel& model, const std::filesystem::path& file);

}  // namespace armo
