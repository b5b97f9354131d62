#include "armo/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "armo/rng.hpp"

namespace armo {

namespace {

constexpr double kTau = 6.28318530717958647692;

double smoothstep5(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0);
}

// Bounded sum of sinusoids: amplitudes decay geometrically and are normalized
// so the total excursion never exceeds `total_amplitude`.
struct BoundedOscillation {
    std::array<double, 4> amplitude{};
    std::array<double, 4> frequency{};
    std::array<double, 4> phase{};
    std::array<double, 4> drift{};  // Bezier control values
    int components = 2;

    static BoundedOscillation draw(Rng& rng, int components, double total_amplitude,
                                   double drift_amplitude, double f_min, double f_max) {
        BoundedOscillation o;
        o.components = components;
        double weight_sum = 0.0;
        for (int k = 0; k < components; ++k) weight_sum += std::pow(0.6, k);
        for (int k = 0; k < components; ++k) {
            o.amplitude[k] = total_amplitude * std::pow(0.6, k) / weight_sum;
            o.frequency[k] = rng.uniform(f_min, f_max);
            o.phase[k] = rng.uniform(0.0, kTau);
        }
        o.drift[0] = 0.0;
        for (int k = 1; k < 4; ++k)
            o.drift[k] = rng.uniform(-drift_amplitude, drift_amplitude);
        return o;
    }

    double at(double t, double u) const {  // u = t / duration for the drift
        double v = 0.0;
        for (int k = 0; k < components; ++k)
            v += amplitude[k] * std::sin(kTau * frequency[k] * t + phase[k]);
        const double w = 1.0 - u;
        v += w * w * w * drift[0] + 3.0 * w * w * u * drift[1] +
             3.0 * w * u * u * drift[2] + u * u * u * drift[3];
        return v;
    }
};

}  // namespace

void SynthConfig::validate() const {
    if (clips < 1)
        throw DomainError(ErrorCode::InvalidArgument, "clips must be >= 1");
    if (!(min_duration > 0.0) || !(max_duration >= min_duration))
        throw DomainError(ErrorCode::InvalidArgument, "bad duration range");
    if (!(min_frequency > 0.0) || !(max_frequency >= min_frequency))
        throw DomainError(ErrorCode::InvalidArgument, "bad frequency range");
    if (!(min_amplitude > 0.0) || !(max_amplitude >= min_amplitude))
        throw DomainError(ErrorCode::InvalidArgument, "bad amplitude range");
}

std::vector<HumanMotion> synth_human_motion(const SynthConfig& cfg) {
    cfg.validate();
    constexpr double kFps = 60.0;

    std::vector<HumanMotion> clips;
    clips.reserve(cfg.clips);

    for (int clip = 0; clip < cfg.clips; ++clip) {
        Rng rng = Rng::stream(cfg.seed, clip);

        const double duration = rng.uniform(cfg.min_duration, cfg.max_duration);
        const int frames = static_cast<int>(std::lround(duration * kFps)) + 1;
        const bool left_active = rng.uniform() < 0.5;
        const double side = left_active ? -1.0 : 1.0;

        const Vec3 root(0.0, 0.0, 0.9);
        const Vec3 shoulder = root + Vec3(side * 0.18, 0.02, 0.35);

        // The active wrist moves in a spherical band around the root. The
        // bounds are chosen so that after workspace scaling the robot's wrist
        // center keeps clear of the desk plane, the base axis, the folded
        // inner workspace and the base yaw limits.
        const double nominal_radius = rng.uniform(0.46, 0.50);
        const double azimuth_center = kTau / 4.0 + side * 0.35 + rng.uniform(-0.15, 0.15);
        const double elevation_center = rng.uniform(0.38, 0.52);
        const int components = 2 + static_cast<int>(rng.uniform_index(3));

        const double amp = rng.uniform(cfg.min_amplitude, cfg.max_amplitude);
        const double angular = amp / nominal_radius;  // meters on the sphere
        const auto radius_osc = BoundedOscillation::draw(
            rng, components, std::min(0.5 * amp, 0.04), 0.02, cfg.min_frequency,
            cfg.max_frequency);
        const auto azimuth_osc = BoundedOscillation::draw(
            rng, components, std::min(angular, 0.55), 0.15, cfg.min_frequency,
            cfg.max_frequency);
        const auto elevation_osc = BoundedOscillation::draw(
            rng, components, std::min(0.7 * angular, 0.10), 0.06, cfg.min_frequency,
            cfg.max_frequency);

        Vec3 elbow_jitter_phase, idle_phase;
        for (int a = 0; a < 3; ++a) {
            elbow_jitter_phase[a] = rng.uniform(0.0, kTau);
            idle_phase[a] = rng.uniform(0.0, kTau);
        }

        const double ramp = std::min(0.8, duration / 3.0);
        auto envelope = [&](double t) {
            return smoothstep5(std::min(t, duration - t) / ramp);
        };
        auto wrist_at = [&](double t) {
            const double u = t / duration;
            const double e = envelope(t);
            const double r =
                nominal_radius +
                e * (radius_osc.at(t, u) - radius_osc.at(0.0, 0.0));
            const double psi =
                azimuth_center +
                e * (azimuth_osc.at(t, u) - azimuth_osc.at(0.0, 0.0));
            const double phi =
                elevation_center +
                e * (elevation_osc.at(t, u) - elevation_osc.at(0.0, 0.0));
            return (root + r * Vec3(std::cos(phi) * std::cos(psi),
                                    std::cos(phi) * std::sin(psi), std::sin(phi)))
                .eval();
        };

        const Vec3 idle_shoulder = root + Vec3(-side * 0.18, 0.02, 0.35);
        const Vec3 idle_wrist_base = idle_shoulder + Vec3(-side * 0.08, 0.20, 0.05);

        HumanMotion motion;
        motion.fps = kFps;
        auto& pts = motion.points;
        for (int id : {kLandmarkRoot, kLandmarkHead, kLandmarkElbowLeft,
                       kLandmarkElbowRight, kLandmarkWristLeft, kLandmarkWristRight})
            pts[id].reserve(frames);

        const int active_wrist = left_active ? kLandmarkWristLeft : kLandmarkWristRight;
        const int active_elbow = left_active ? kLandmarkElbowLeft : kLandmarkElbowRight;
        const int idle_wrist = left_active ? kLandmarkWristRight : kLandmarkWristLeft;
        const int idle_elbow = left_active ? kLandmarkElbowRight : kLandmarkElbowLeft;

        for (int f = 0; f < frames; ++f) {
            const double t = f / kFps;
            const double e = envelope(t);

            const Vec3 wrist = wrist_at(t);
            // Elbow rides above the shoulder-wrist chord so the mapped arm
            // prefers raised-elbow solutions that keep clear of the desk.
            Vec3 elbow = 0.5 * (shoulder + wrist) + Vec3(0.0, 0.0, 0.06);
            for (int a = 0; a < 3; ++a)
                elbow[a] += 0.03 * e * std::sin(kTau * 0.3 * t + elbow_jitter_phase[a]);

            Vec3 idle_w = idle_wrist_base;
            for (int a = 0; a < 3; ++a)
                idle_w[a] += 0.015 * e * std::sin(kTau * 0.25 * t + idle_phase[a]);
            const Vec3 idle_e =
                0.5 * (idle_shoulder + idle_w) + Vec3(0.0, 0.0, -0.04);

            Vec3 head = root + Vec3(0.0, 0.0, 0.55);
            head.x() += 0.01 * e * std::sin(kTau * 0.2 * t);

            pts[kLandmarkRoot].push_back(root);
            pts[kLandmarkHead].push_back(head);
            pts[active_wrist].push_back(wrist);
            pts[active_elbow].push_back(elbow);
            pts[idle_wrist].push_back(idle_w);
            pts[idle_elbow].push_back(idle_e);
        }
        clips.push_back(std::move(motion));
    }
    return clips;
}

}  // namespace armo
