#pragma once

#include "armo/kinematics.hpp"
#include "armo/robot_model.hpp"
#include "armo/types.hpp"

namespace armo {

/// One offending contact: spheres `a` and `b` overlap by `depth` meters.
/// `b` is -1 for ground-plane contacts.
struct ContactPair {
    int a = 0;
    int b = -1;
    double depth = 0.0;
};

struct CollisionReport {
    double cost = 0.0;  // total penetration depth in meters, >= 0
    std::vector<ContactPair> pairs;

    bool colliding() const { return cost > 0.0; }
};

/// World-frame centers of the model's collision spheres at configuration q,
/// in the order they appear in `model.collision_spheres`.
std::vector<Vec3> sphere_centers(const RobotModel& model, const JointVector& q);

/// Penetration-depth cost over all non-adjacent link sphere pairs plus the
/// ground plane z = 0 (when enabled), with the model's safety margin.
CollisionReport collision_cost(const RobotModel& model, const JointVector& q);

/// Elementwise collision cost per frame; results are independent of
/// evaluation order.
std::vector<double> batch_collision_cost(const RobotModel& model,
                                         const JointTrajectory& traj);

}  // namespace armo
