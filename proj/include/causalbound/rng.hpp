#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace causalbound {

/// Seeded RNG with explicit distribution algorithms (53-bit uniforms,
/// Box-Muller normals) so streams are reproducible across standard libraries.
class Rng {
  public:
    explicit Rng(uint64_t seed) : base_(seed), gen_(splitmix(seed)) {}

    uint64_t u64() { return gen_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1); safe under log/logit.
    double uniform_open() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform_open();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double th = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    int uniform_int(int n) {  // 0..n-1; modulo bias is irrelevant at our sizes
        return static_cast<int>(gen_() % static_cast<uint64_t>(n));
    }

    /// Independent child stream; deterministic in (parent seed, tag).
    Rng child(uint64_t tag) const {
        return Rng(splitmix(base_ ^ (0x9e3779b97f4a7c15ULL * (tag + 1))));
    }

    uint64_t base_seed() const { return base_; }

  private:
    static uint64_t splitmix(uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    uint64_t base_;
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace causalbound
