#pragma once

#include <cstdint>
#include <vector>

#include "armo/types.hpp"

namespace armo {

/// Seeded generator of synthetic arm-dance clips: the active wrist follows
/// superposed sinusoids plus a smooth drift under a zero-velocity envelope,
/// the elbow tracks a jittered midpoint, the other side idles.
struct SynthConfig {
    int clips = 20;
    double min_duration = 2.5;  // seconds
    double max_duration = 6.0;
    double min_frequency = 0.2;  // Hz
    double max_frequency = 1.2;
    double min_amplitude = 0.05;  // meters
    double max_amplitude = 0.35;
    std::uint64_t seed = 0;

    void validate() const;
};

std::vector<HumanMotion> synth_human_motion(const SynthConfig& cfg);

}  // namespace armo
