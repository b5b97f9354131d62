#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "armo/diffusion.hpp"
#include "armo/kinematics.hpp"
#include "armo/rng.hpp"
#include "net.hpp"

namespace armo::diffusion {

Eigen::VectorXd encoder_forward(const ModelWeights& weights, const ConditionSet& cond) {
    return net::encode(weights, {cond}).row(0).transpose();
}

Eigen::MatrixXd decoder_forward(const ModelWeights& weights, const MotionSample& noisy,
                                int t, const Eigen::VectorXd& cond_feature) {
    if (t < 0 || t >= weights.params.diffusion_steps)
        throw DomainError(ErrorCode::InvalidArgument, "diffusion step out of range");
    std::unique_ptr<net::Cache, net::CacheDeleter> cache(net::new_cache());
    Eigen::MatrixXd cond(1, cond_feature.size());
    cond.row(0) = cond_feature.transpose();
    const auto out =
        net::decode(weights, noisy.data, {t}, cond, {noisy.l_valid}, cache.get());
    return out.x0hat;
}

namespace {

// Evenly spaced subsequence of [0, steps) used by the implicit sampler.
std::vector<int> ddim_timesteps(int steps, int ddim_steps) {
    std::vector<int> taus;
    for (int k = 0; k < ddim_steps; ++k) {
        const int t = ddim_steps == 1
                          ? 0
                          : static_cast<int>(std::llround(
                                static_cast<double>(k) * (steps - 1) / (ddim_steps - 1)));
        if (taus.empty() || taus.back() != t) taus.push_back(t);
    }
    return taus;
}

void clamp_sample(Eigen::MatrixXd& data, Variant variant, const RobotModel& model) {
    if (variant == Variant::Joint) {
        for (Eigen::Index r = 0; r < data.rows(); ++r)
            for (int j = 0; j < 3; ++j)
                data(r, j) = std::clamp(data(r, j), model.joint_limits(j, 0),
                                        model.joint_limits(j, 1));
    } else {
        const Vec3 shoulder(0.0, 0.0, model.base_height);
        for (Eigen::Index r = 0; r < data.rows(); ++r) {
            Vec3 p = data.row(r).head<3>().transpose();
            const double d = (p - shoulder).norm();
            const double outer = 0.999 * model.reach();
            if (d > outer) {
                p = shoulder + (p - shoulder) * (outer / d);
                data.row(r).head<3>() = p.transpose();
            }
        }
    }
}

}  // namespace

MotionSample ddim_sample(const ModelWeights& weights, const ConditionSet& cond,
                         std::uint64_t seed, const RobotModel& model) {
    const auto& params = weights.params;
    if (cond.l_valid < 1 || cond.l_valid > kSequenceLength)
        throw DomainError(ErrorCode::InvalidArgument, "l_valid out of range");

    const NoiseSchedule sched = NoiseSchedule::cosine(params.diffusion_steps);
    const Eigen::MatrixXd cond_feature = net::encode(weights, {cond});

    Rng rng = Rng::stream(seed, 0x5A3);
    Eigen::MatrixXd x(kSequenceLength, kChannels);
    for (int r = 0; r < kSequenceLength; ++r)
        for (int c = 0; c < kChannels; ++c) x(r, c) = rng.normal();

    const auto taus = ddim_timesteps(params.diffusion_steps, params.ddim_steps);
    std::unique_ptr<net::Cache, net::CacheDeleter> cache(net::new_cache());

    for (int k = static_cast<int>(taus.size()) - 1; k >= 0; --k) {
        const int t = taus[k];
        const auto out = net::decode(weights, x, {t}, cond_feature, {cond.l_valid},
                                     cache.get());
        const Eigen::MatrixXd& x0hat = out.x0hat;
        const double abar = sched.alpha_bar[t];
        const double abar_prev =
            k > 0 ? sched.alpha_bar[taus[k - 1]] : sched.alpha_bar_prev[taus[0]];
        const Eigen::MatrixXd eps =
            (x - std::sqrt(abar) * x0hat) / std::sqrt(std::max(1.0 - abar, 1e-12));
        x = std::sqrt(abar_prev) * x0hat +
            std::sqrt(std::max(1.0 - abar_prev, 0.0)) * eps;
    }

    clamp_sample(x, params.variant, model);

    MotionSample sample;
    sample.data = x;
    sample.l_valid = cond.l_valid;
    sample.fps = kSampleFps;
    return sample;
}

PostprocessResult postprocess(const RobotModel& model, const MotionSample& sample,
                              const ConditionSet& cond, Variant variant,
                              const PsoParams& pso, std::uint64_t seed) {
    const int l = cond.l_valid;
    if (l < 1 || l > kSequenceLength)
        throw DomainError(ErrorCode::InvalidArgument, "l_valid out of range");

    // Valid positional segment, endpoint-aligned onto the condition.
    Eigen::MatrixXd pos = sample.data.topRows(l).leftCols(3);
    if (l == 1) {
        pos.row(0) = cond.x_start.transpose();
    } else {
        const Eigen::RowVector3d start_fix =
            cond.x_start.transpose() - pos.row(0);
        const Eigen::RowVector3d end_fix = cond.x_end.transpose() - pos.row(l - 1);
        for (int i = 0; i < l; ++i) {
            const double lambda = static_cast<double>(i) / (l - 1);
            pos.row(i) += (1.0 - lambda) * start_fix + lambda * end_fix;
        }
    }

    PostprocessResult result;
    JointTrajectory traj;
    traj.fps = kSampleFps;
    traj.frames.reserve(l);
    std::vector<int> failed;

    if (variant == Variant::Joint) {
        for (int i = 0; i < l; ++i) {
            Vec3 arm = pos.row(i).transpose();
            for (int j = 0; j < 3; ++j)
                arm[j] = std::clamp(arm[j], model.joint_limits(j, 0),
                                    model.joint_limits(j, 1));
            traj.frames.push_back(model.clamp_to_limits(with_forward_wrist(arm)));
        }
    } else {
        bool have_prev = false;
        Vec3 prev = Vec3::Zero();
        for (int i = 0; i < l; ++i) {
            Vec3 target = pos.row(i).transpose();
            if (!wrist_center_reachable(model, target))
                target = clamp_to_workspace(model, target);
            bool ok = true;
            IkResult ik;
            try {
                ik = ik_wrist_center(model, target);
            } catch (const DomainError&) {
                ok = false;
            }
            if (!ok) {
                failed.push_back(i);
                traj.frames.push_back(
                    have_prev ? model.clamp_to_limits(with_forward_wrist(prev))
                              : JointVector::Zero());
                continue;
            }
            // Continuity selection over the candidate set.
            Vec3 best = ik.candidates.front();
            double best_cost = std::numeric_limits<double>::infinity();
            for (const auto& cand : ik.candidates) {
                const Vec3 ref = have_prev ? prev : Vec3::Zero();
                const Vec3 delta(angle_difference(cand[0], ref[0]),
                                 angle_difference(cand[1], ref[1]),
                                 angle_difference(cand[2], ref[2]));
                const double cost = delta.norm();
                if (cost < best_cost) {
                    best_cost = cost;
                    best = cand;
                }
            }
            prev = best;
            have_prev = true;
            traj.frames.push_back(model.clamp_to_limits(with_forward_wrist(best)));
        }
    }

    result.ik_failures = static_cast<int>(failed.size());
    PsoParams pso_local = pso;
    if (l < 4) pso_local.smoothing = false;  // too short for the spline stage
    auto [optimized, report] =
        optimize_trajectory(model, traj, pso_local, seed, failed);
    result.trajectory = std::move(optimized);
    result.report = std::move(report);
    return result;
}

}  // namespace armo::diffusion
