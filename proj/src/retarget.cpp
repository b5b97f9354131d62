#include "armo/retarget.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "armo/optimize.hpp"

namespace armo {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Zero-phase Gaussian FIR. sigma (in samples) is chosen so the filter's
// half-power point sits at the configured cutoff: sigma_t = sqrt(ln 2)/(2*pi*fc).
std::vector<double> gaussian_kernel(double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * radius + 1);
    for (int i = -radius; i <= radius; ++i)
        k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    return k;
}

std::vector<Vec3> filter_landmark(const std::vector<Vec3>& traj,
                                  const std::vector<double>& kernel) {
    const int n = static_cast<int>(traj.size());
    const int radius = static_cast<int>(kernel.size() / 2);
    std::vector<Vec3> out(n);
    for (int i = 0; i < n; ++i) {
        Vec3 acc = Vec3::Zero();
        double wsum = 0.0;
        for (int d = -radius; d <= radius; ++d) {
            const int j = i + d;
            if (j < 0 || j >= n) continue;  // renormalized truncation at borders
            const double w = kernel[d + radius];
            acc += w * traj[j];
            wsum += w;
        }
        out[i] = acc / wsum;
    }
    return out;
}

double total_velocity(const std::vector<Vec3>& traj, double fps) {
    double path = 0.0;
    for (std::size_t i = 1; i < traj.size(); ++i)
        path += (traj[i] - traj[i - 1]).norm();
    return path * fps;
}

}  // namespace

HumanMotion preprocess(const HumanMotion& motion, const RetargetConfig& cfg) {
    motion.validate();
    if (motion.frame_count() < 4)
        throw DomainError(ErrorCode::SequenceTooShort,
                          "need at least 4 frames to preprocess a clip");

    const double sigma_t = std::sqrt(std::log(2.0)) / (2.0 * kPi * cfg.lowpass_cutoff_hz);
    const auto kernel = gaussian_kernel(std::max(0.5, sigma_t * motion.fps));

    HumanMotion out;
    out.fps = motion.fps;
    for (const auto& [id, traj] : motion.points)
        out.points[id] = filter_landmark(traj, kernel);

    const std::vector<Vec3> root = out.points.at(kLandmarkRoot);
    for (auto& [id, traj] : out.points)
        for (std::size_t i = 0; i < traj.size(); ++i) traj[i] -= root[i];
    return out;
}

WristSelection select_active_wrist(const HumanMotion& motion) {
    WristSelection sel;
    sel.total_left = total_velocity(motion.landmark(kLandmarkWristLeft), motion.fps);
    sel.total_right = total_velocity(motion.landmark(kLandmarkWristRight), motion.fps);
    if (sel.total_right > sel.total_left) {
        sel.wrist_id = kLandmarkWristRight;
        sel.elbow_id = kLandmarkElbowRight;
    } else {
        sel.wrist_id = kLandmarkWristLeft;
        sel.elbow_id = kLandmarkElbowLeft;
    }
    return sel;
}

double compute_scale(const RobotModel& model, const CartesianTrajectory& wrist,
                     const RetargetConfig& cfg) {
    if (wrist.points.empty())
        throw DomainError(ErrorCode::InvalidArgument, "empty wrist trajectory");
    double max_radius = 0.0;
    for (const auto& p : wrist.points) max_radius = std::max(max_radius, p.norm());
    if (max_radius < 1e-6)
        throw DomainError(ErrorCode::DegenerateMotion,
                          "wrist trajectory never leaves the origin");
    return cfg.scale_policy * model.reach() / max_radius;
}

MapResult map_trajectory(const RobotModel& model, const HumanMotion& motion,
                         const RetargetConfig& cfg) {
    const WristSelection sel = select_active_wrist(motion);
    const auto& wrist = motion.landmark(sel.wrist_id);
    const auto& elbow = motion.landmark(sel.elbow_id);

    CartesianTrajectory wrist_traj{motion.fps, wrist};
    const double scale = compute_scale(model, wrist_traj, cfg);

    MapResult result;
    result.scale = scale;
    result.wrist_id = sel.wrist_id;
    result.elbow_id = sel.elbow_id;
    result.trajectory.fps = motion.fps;
    result.trajectory.frames.reserve(wrist.size());

    bool have_previous = false;
    Vec3 previous = Vec3::Zero();
    int solved = 0;

    for (std::size_t i = 0; i < wrist.size(); ++i) {
        Vec3 target = scale * wrist[i];
        bool clamped = false;
        if (!wrist_center_reachable(model, target)) {
            target = clamp_to_workspace(model, target);
            clamped = true;
        }

        IkResult ik;
        try {
            ik = ik_wrist_center(model, target);
        } catch (const DomainError&) {
            if (!clamped) {
                target = clamp_to_workspace(model, target);
                clamped = true;
                try {
                    ik = ik_wrist_center(model, target);
                } catch (const DomainError&) {}
            }
        }
        if (clamped) result.clamped_frames.push_back(static_cast<int>(i));

        if (ik.candidates.empty()) {
            // No usable solution even after the workspace clamp (limit-starved
            // model); carry the previous frame forward.
            if (have_previous) {
                result.trajectory.frames.push_back(
                    model.clamp_to_limits(with_forward_wrist(previous)));
            } else {
                result.trajectory.frames.push_back(JointVector::Zero());
            }
            continue;
        }
        if (ik.singular) result.singular_frames.push_back(static_cast<int>(i));

        const Vec3 elbow_target = scale * elbow[i];
        double best_cost = std::numeric_limits<double>::infinity();
        Vec3 best = ik.candidates.front();
        for (const auto& cand : ik.candidates) {
            const FkResult fk = forward_kinematics(model, with_forward_wrist(cand));
            double cost = (fk.elbow - elbow_target).norm();
            if (have_previous) {
                Vec3 delta(angle_difference(cand[0], previous[0]),
                           angle_difference(cand[1], previous[1]),
                           angle_difference(cand[2], previous[2]));
                cost += cfg.continuity_weight * delta.norm();
            }
            if (cost < best_cost) {
                best_cost = cost;
                best = cand;
            }
        }

        previous = best;
        have_previous = true;
        ++solved;
        result.trajectory.frames.push_back(
            model.clamp_to_limits(with_forward_wrist(best)));
    }

    if (solved == 0)
        throw DomainError(ErrorCode::AllFramesUnreachable,
                          "no frame of the clip could be mapped");
    return result;
}

JointTrajectory transform(const RobotModel& model, const HumanMotion& motion,
                          const RetargetConfig& cfg, const PsoParams& pso,
                          std::uint64_t seed) {
    const HumanMotion prepped = preprocess(motion, cfg);
    MapResult mapped = map_trajectory(model, prepped, cfg);
    auto [optimized, report] = optimize_trajectory(model, mapped.trajectory, pso, seed);
    return optimized;
}

}  // namespace armo
