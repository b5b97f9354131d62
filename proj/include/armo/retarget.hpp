#pragma once

#include "armo/kinematics.hpp"
#include "armo/optimize.hpp"
#include "armo/robot_model.hpp"
#include "armo/types.hpp"

namespace armo {

struct RetargetConfig {
    double scale_policy = 0.8;       // fraction of max reach the mapped wrist may use
    double lowpass_cutoff_hz = 6.0;  // half-power point of the zero-phase Gaussian
    double continuity_weight = 0.05; // radians weight tie-breaking near-equal candidates
};

/// Low-pass filters every landmark and re-expresses all points with the root
/// landmark's per-frame position as origin (world z stays up).
/// Throws SequenceTooShort for clips under 4 frames.
HumanMotion preprocess(const HumanMotion& motion, const RetargetConfig& cfg = {});

/// The wrist with the larger total velocity (path length x fps) and its
/// same-side elbow. Ties break to the left wrist.
struct WristSelection {
    int wrist_id = kLandmarkWristLeft;
    int elbow_id = kLandmarkElbowLeft;
    double total_left = 0.0;
    double total_right = 0.0;
};

WristSelection select_active_wrist(const HumanMotion& motion);

/// scale = scale_policy * reach / max frame radius of the wrist trajectory.
/// Throws DegenerateMotion when the wrist never leaves the origin.
double compute_scale(const RobotModel& model, const CartesianTrajectory& wrist,
                     const RetargetConfig& cfg = {});

struct MapResult {
    JointTrajectory trajectory;
    std::vector<int> clamped_frames;   // targets projected back into the workspace
    std::vector<int> singular_frames;  // targets on the base axis
    double scale = 1.0;
    int wrist_id = kLandmarkWristLeft;
    int elbow_id = kLandmarkElbowLeft;
};

/// Per-frame mapping of a preprocessed clip into joint space: wrist-center
/// targets at scale * wrist, candidate selection against the scaled elbow,
/// forward-facing wrist angles. Unreachable targets are pulled back along the
/// ray to the origin and flagged.
MapResult map_trajectory(const RobotModel& model, const HumanMotion& motion,
                         const RetargetConfig& cfg = {});

/// Full pipeline: preprocess, wrist selection, scaling, mapping, then the
/// repair/smoothing/time-parameterization stage.
JointTrajectory transform(const RobotModel& model, const HumanMotion& motion,
                          const RetargetConfig& cfg = {},
                          const PsoParams& pso = {}, std::uint64_t seed = 0);

}  // namespace armo
