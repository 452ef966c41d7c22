#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

namespace maernav {

/// Seeded generator with a serializable state. Every draw is a pure function of the
/// engine state, so saving the state is enough for exact resume.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; one value per call, nothing cached.
    double normal();

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);

    std::string state() const;
    void set_state(const std::string& s);

private:
    std::mt19937_64 engine_;
};

/// Independent stream seed derived from a base seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

} // namespace maernav
