#pragma once

#include <cstdint>
#include <utility>

#include "armo/collision.hpp"
#include "armo/robot_model.hpp"
#include "armo/types.hpp"

namespace armo {

struct PsoParams {
    int particles = 50;
    double inertia = 0.7;  // w
    double c1 = 1.5;
    double c2 = 1.5;
    int max_iters = 30;
    double threshold = 1.0;     // accept a repair when its fitness drops below this
    double init_sigma = 0.1;    // radians of Gaussian spread around the original point
    bool redraw_r_each_iter = true;  // false: draw r1, r2 once per point (strict mode)
    bool smoothing = true;      // spline + Gaussian pass after removals
    int max_rounds = 3;         // repair/smooth/recheck rounds before giving up

    void validate() const;
};

struct OptimizeReport {
    std::vector<int> repaired;    // indices replaced by a below-threshold best
    std::vector<int> removed;     // indices deleted as unresolved
    std::vector<int> iterations;  // swarm sweeps spent per treated point
    int pre_collision_count = 0;
    int post_collision_count = 0;
    double seconds = 0.0;
};

/// Eq.-style repair fitness: heavily weighted penetration plus the joint-space
/// distance from the original point.
double repair_fitness(const RobotModel& model, const JointVector& candidate,
                      const JointVector& original);

struct RepairResult {
    JointTrajectory trajectory;
    std::vector<int> repaired;
    std::vector<int> unresolved;
    std::vector<int> iterations;
};

/// Per-point particle swarm over the colliding frames. Frames outside the
/// collision set are left bitwise untouched. Randomness is derived per point
/// from (seed, point index), so any evaluation schedule gives the same result.
RepairResult pso_repair(const RobotModel& model, const JointTrajectory& traj,
                        const PsoParams& params, std::uint64_t seed);

/// Deletes the unresolved points, least-squares fits a clamped cubic B-spline
/// per joint (endpoints interpolated exactly), resamples on the retained index
/// grid and Gaussian-filters (sigma 1.5 samples, kernel 7) with the first and
/// last frames re-pinned. Throws TooFewPoints below 4 remaining frames.
JointTrajectory remove_and_smooth(const JointTrajectory& traj,
                                  const std::vector<int>& unresolved);

/// Repair/remove/smooth rounds until every frame is collision-free; throws
/// CollisionUnresolvable when collisions persist after params.max_rounds.
/// `pre_removed` frames skip repair and go straight to removal.
std::pair<JointTrajectory, OptimizeReport> recheck_loop(
    const RobotModel& model, const JointTrajectory& traj, const PsoParams& params,
    std::uint64_t seed, const std::vector<int>& pre_removed = {});

/// Velocity- and acceleration-limited retiming: per-segment speed caps from
/// the joint velocity limits, forward/backward acceleration passes, then
/// trapezoidal integration of the timestamps.
JointTrajectory time_parameterize(const RobotModel& model,
                                  const JointTrajectory& traj);

/// recheck_loop followed by time_parameterize.
std::pair<JointTrajectory, OptimizeReport> optimize_trajectory(
    const RobotModel& model, const JointTrajectory& traj, const PsoParams& params = {},
    std::uint64_t seed = 0, const std::vector<int>& pre_removed = {});

}  // namespace armo
