#include "armo/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "armo/kinematics.hpp"

namespace armo::diffusion {

Variant variant_from_string(const std::string& name) {
    if (name == "j" || name == "J" || name == "joint") return Variant::Joint;
    if (name == "c" || name == "C" || name == "cartesian") return Variant::Cartesian;
    throw DomainError(ErrorCode::InvalidArgument, "unknown variant '" + name + "'");
}

std::string to_string(Variant v) {
    return v == Variant::Joint ? "j" : "c";
}

void MotionSample::validate() const {
    if (data.rows() != kSequenceLength || data.cols() != kChannels)
        throw DomainError(ErrorCode::InvalidArgument, "sample must be 80x6");
    if (l_valid < 1 || l_valid > kSequenceLength)
        throw DomainError(ErrorCode::InvalidArgument, "l_valid out of range");
    for (int i = 0; i < l_valid - 1; ++i) {
        const Eigen::Vector3d want =
            (data.row(i + 1).head<3>() - data.row(i).head<3>()) * fps;
        if ((data.row(i).tail<3>().transpose() - want).lpNorm<Eigen::Infinity>() > 1e-9)
            throw DomainError(ErrorCode::InvalidArgument,
                              "velocity channels must be fps-scaled differences");
    }
    if (data.row(l_valid - 1).tail<3>().lpNorm<Eigen::Infinity>() > 1e-9)
        throw DomainError(ErrorCode::InvalidArgument,
                          "last valid velocity row must be zero");
    for (int i = l_valid; i < kSequenceLength; ++i) {
        if ((data.row(i).head<3>() - data.row(l_valid - 1).head<3>())
                .lpNorm<Eigen::Infinity>() > 1e-12 ||
            data.row(i).tail<3>().lpNorm<Eigen::Infinity>() > 1e-12)
            throw DomainError(ErrorCode::InvalidArgument,
                              "padding must repeat the last valid pose at rest");
    }
}

ConditionSet ConditionSet::of(const MotionSample& sample) {
    ConditionSet c;
    c.x_start = sample.data.row(0).head<3>().transpose();
    c.x_end = sample.data.row(sample.l_valid - 1).head<3>().transpose();
    c.l_valid = sample.l_valid;
    return c;
}

void ModelParams::validate() const {
    if (hidden < heads || hidden % heads != 0)
        throw DomainError(ErrorCode::InvalidArgument,
                          "hidden width must be divisible by the head count");
    if (depth < 1)
        throw DomainError(ErrorCode::InvalidArgument, "depth must be >= 1");
    if (diffusion_steps < 2)
        throw DomainError(ErrorCode::InvalidArgument, "diffusion steps must be >= 2");
    if (ddim_steps < 1 || ddim_steps > diffusion_steps)
        throw DomainError(ErrorCode::InvalidArgument,
                          "ddim steps must lie in [1, diffusion steps]");
    if (!(sigma_frac > 0.0))
        throw DomainError(ErrorCode::InvalidArgument, "sigma_frac must be > 0");
}

Eigen::VectorXd ffm_weights(int l_valid, int length, double sigma_frac) {
    if (l_valid < 1 || l_valid > length)
        throw DomainError(ErrorCode::InvalidArgument, "l_valid out of range");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(length);
    const double sigma = l_valid * sigma_frac;
    const double s2 = sigma * sigma;
    for (int i = 0; i < l_valid; ++i) {
        const double start_distance = i;
        const double end_distance = l_valid - 1 - i;
        w[i] = std::exp(-2.0 * start_distance * start_distance / s2) +
               std::exp(-2.0 * end_distance * end_distance / s2);
    }
    return w;
}

NoiseSchedule NoiseSchedule::cosine(int steps) {
    NoiseSchedule s;
    s.beta.resize(steps);
    s.alpha_bar.resize(steps);
    s.alpha_bar_prev.resize(steps);
    s.posterior_var.resize(steps);
    s.posterior_logvar_clipped.resize(steps);

    constexpr double kOffset = 0.008;
    auto f = [steps](double t) {
        const double arg = (t / steps + kOffset) / (1.0 + kOffset) *
                           (3.14159265358979323846 / 2.0);
        const double c = std::cos(arg);
        return c * c;
    };
    const double f0 = f(0.0);
    double prev = 1.0;
    for (int t = 0; t < steps; ++t) {
        double abar = f(t + 1.0) / f0;
        double beta = 1.0 - abar / prev;
        beta = std::min(beta, 0.999);
        abar = prev * (1.0 - beta);
        s.beta[t] = beta;
        s.alpha_bar[t] = abar;
        s.alpha_bar_prev[t] = prev;
        s.posterior_var[t] = (1.0 - prev) / (1.0 - abar) * beta;
        prev = abar;
    }
    for (int t = 0; t < steps; ++t) {
        const double v = t == 0 ? s.posterior_var[std::min(1, steps - 1)]
                                : s.posterior_var[t];
        s.posterior_logvar_clipped[t] = std::log(std::max(v, 1e-20));
    }
    return s;
}

std::vector<MotionSample> segment_dataset(const JointTrajectory& raw, Variant variant,
                                          const RobotModel& model) {
    raw.validate();
    if (std::abs(raw.fps - 60.0) > 1e-6)
        throw DomainError(ErrorCode::InvalidArgument,
                          "dataset segmentation expects 60 Hz trajectories");
    const int n = static_cast<int>(raw.frames.size());
    const int factor = 5;  // 60 Hz -> 12 Hz
    constexpr double kStillSpeed = 0.02;  // rad/s
    constexpr int kMinFrames = 120, kMaxFrames = 400;

    // A source segment i (between frames i and i+1) is "moving" when the mean
    // joint speed across it stays above the stillness threshold.
    std::vector<bool> moving(std::max(0, n - 1));
    for (int i = 0; i + 1 < n; ++i) {
        const double speed =
            (raw.frames[i + 1] - raw.frames[i]).cwiseAbs().mean() * raw.fps;
        moving[i] = speed >= kStillSpeed;
    }

    std::vector<MotionSample> samples;
    int run_start = -1;
    for (int i = 0; i <= static_cast<int>(moving.size()); ++i) {
        const bool on = i < static_cast<int>(moving.size()) && moving[i];
        if (on && run_start < 0) run_start = i;
        if (!on && run_start >= 0) {
            const int first = run_start;
            const int last = i;  // inclusive frame range [first, last]
            run_start = -1;
            const int frames = last - first + 1;
            if (frames < kMinFrames || frames > kMaxFrames) continue;

            std::vector<Vec3> pos;
            for (int k = first; k <= last; k += factor) {
                if (variant == Variant::Joint)
                    pos.push_back(raw.frames[k].head<3>());
                else
                    pos.push_back(forward_kinematics(model, raw.frames[k]).wrist);
            }
            const int m = static_cast<int>(pos.size());

            MotionSample sample;
            sample.l_valid = m;
            sample.fps = kSampleFps;
            for (int k = 0; k < kSequenceLength; ++k) {
                const Vec3 p = pos[std::min(k, m - 1)];
                Vec3 v = Vec3::Zero();
                if (k < m - 1) v = (pos[k + 1] - pos[k]) * kSampleFps;
                sample.data.row(k) << p.transpose(), v.transpose();
            }
            samples.push_back(std::move(sample));
        }
    }
    return samples;
}

}  // namespace armo::diffusion
