#include "armo/collision.hpp"

#include <cmath>

namespace armo {

namespace {

// Frame of each link: origin at the proximal joint, rotation mapping local z
// onto the link axis (the tool link maps local z onto its forward axis).
struct LinkFrame {
    Vec3 origin;
    Eigen::Matrix3d rotation;
};

Eigen::Matrix3d yaw_pitch(double yaw, double pitch) {
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    Eigen::Matrix3d r;
    // Rz(yaw) * Ry(pitch): local z maps to the pitched link direction.
    r << cy * cp, -sy, cy * sp, sy * cp, cy, sy * sp, -sp, 0, cp;
    return r;
}

std::array<LinkFrame, 4> link_frames(const JointVector& q, const FkResult& fk) {
    std::array<LinkFrame, 4> frames;
    frames[0] = {fk.base, Eigen::Matrix3d::Identity()};
    frames[1] = {fk.shoulder, yaw_pitch(q[0], q[1])};
    frames[2] = {fk.elbow, yaw_pitch(q[0], q[1] + q[2])};
    // Tool spheres run along the tool's forward (local x) axis; rotate local z
    // onto it so axial offsets stay (0, 0, t) like the other links.
    Eigen::Matrix3d swing;
    swing << 0, 0, 1, 0, 1, 0, -1, 0, 0;  // Ry(pi/2): z -> x
    frames[3] = {fk.wrist, fk.tool_rotation * swing};
    return frames;
}

}  // namespace

std::vector<Vec3> sphere_centers(const RobotModel& model, const JointVector& q) {
    const FkResult fk = forward_kinematics(model, q);
    const auto frames = link_frames(q, fk);
    std::vector<Vec3> centers;
    centers.reserve(model.collision_spheres.size());
    for (const auto& s : model.collision_spheres)
        centers.push_back(frames[s.link].origin + frames[s.link].rotation * s.offset);
    return centers;
}

CollisionReport collision_cost(const RobotModel& model, const JointVector& q) {
    const auto centers = sphere_centers(model, q);
    const auto& spheres = model.collision_spheres;
    const double margin = model.collision_margin;

    CollisionReport report;
    const int n = static_cast<int>(spheres.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (std::abs(spheres[i].link - spheres[j].link) < 2)
                continue;  // same or adjacent link: permanently near-touching
            const double dist = (centers[i] - centers[j]).norm();
            const double depth = spheres[i].radius + spheres[j].radius + margin - dist;
            if (depth > 0.0) {
                report.cost += depth;
                report.pairs.push_back({i, j, depth});
            }
        }
        if (model.ground_plane) {
            const double depth = spheres[i].radius + margin - centers[i].z();
            if (depth > 0.0) {
                report.cost += depth;
                report.pairs.push_back({i, -1, depth});
            }
        }
    }
    return report;
}

std::vector<double> batch_collision_cost(const RobotModel& model,
                                         const JointTrajectory& traj) {
    std::vector<double> costs;
    costs.reserve(traj.frames.size());
    for (const auto& q : traj.frames) costs.push_back(collision_cost(model, q).cost);
    return costs;
}

}  // namespace armo
