#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pvariv {

/// Deterministic RNG: mt19937_64 plus a self-contained polar-method normal
/// sampler, so draws are bit-identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform draw in (0,1).
    double uniform() {
        while (true) {
            const double u = (eng_() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }

    /// Standard normal draw (Marsaglia polar).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        while (true) {
            const double u = 2.0 * uniform() - 1.0;
            const double v = 2.0 * uniform() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) {
                const double f = std::sqrt(-2.0 * std::log(s) / s);
                spare_ = v * f;
                has_spare_ = true;
                return u * f;
            }
        }
    }

    std::uint64_t raw() { return eng_(); }

    /// Seed for replication `index` derived from a master seed (SplitMix64
    /// applied to master ^ f(index)); streams stay fixed when the total
    /// replication count changes.
    static std::uint64_t substream(std::uint64_t master, std::uint64_t index) {
        std::uint64_t z = master ^ (index * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace pvariv
