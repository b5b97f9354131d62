#pragma once

#include <cmath>
#include <cstdint>

namespace armo {

/// Deterministic random generator used everywhere randomness is needed.
///
/// splitmix64 core with hand-rolled uniform/normal transforms, so streams are
/// bit-identical across platforms and standard-library versions. Substreams
/// are derived with stream(), which lets parallel and serial schedules of the
/// same work produce identical results.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    /// Standard normal via Box-Muller (one draw per call, two u64s consumed).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        // Guard the log: push u1 into (0, 1].
        u1 = 1.0 - u1;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    /// Derive an independent generator for a substream (e.g. one per
    /// trajectory point or dataset clip).
    static Rng stream(std::uint64_t seed, std::uint64_t substream) {
        Rng mixer(seed ^ (0xd1342543de82ef95ULL * (substream + 1)));
        return Rng(mixer.next_u64());
    }

    template <typename It>
    void shuffle(It first, It last) {
        auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            std::uint64_t j = uniform_index(i);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace armo
