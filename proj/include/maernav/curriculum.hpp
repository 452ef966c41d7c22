#pragma once

#include <deque>
#include <string>
#include <vector>

#include "maernav/rng.hpp"

namespace maernav {

struct EnvId {
    int row = 0;
    int col = 0;
    friend bool operator==(const EnvId&, const EnvId&) = default;
    friend auto operator<=>(const EnvId&, const EnvId&) = default;
};

struct CurriculumConfig {
    int rows = 5;
    int cols = 5;
    int window = 20;
    double unlock_threshold = 0.7;
};

/// Success-gated unlocking over a grid of environments, with failure-weighted sampling.
class Curriculum {
public:
    explicit Curriculum(CurriculumConfig cfg = {});

    const CurriculumConfig& config() const { return cfg_; }

    bool unlocked(EnvId e) const;
    /// Unlocked cells in row-major order.
    std::vector<EnvId> unlocked_envs() const;

    /// Fraction of successes in the window; 0 for an empty window.
    double mean_success(EnvId e) const;

    /// Appends an outcome and, when every unlocked env has a full window above threshold,
    /// unlocks all locked cells 4-adjacent to the unlocked set. Returns the newly unlocked cells.
    std::vector<EnvId> record_outcome(EnvId e, bool success);

    /// Selection probabilities over unlocked_envs(): (1 - mu_i) / sum_j (1 - mu_j), uniform if all are perfect.
    std::vector<double> probabilities() const;
    EnvId sample_env(Rng& rng) const;

    const std::deque<bool>& window(EnvId e) const;
    long long episodes(EnvId e) const;

    /// Text form for checkpoints: unlock set, windows and counts.
    std::string serialize() const;
    static Curriculum deserialize(const std::string& text);

    /// Unlocks every cell; used when the curriculum is disabled.
    void unlock_all();

private:
    std::size_t index(EnvId e) const;
    void check(EnvId e) const;

    CurriculumConfig cfg_;
    std::vector<bool> unlocked_;
    std::vector<std::deque<bool>> windows_;
    std::vector<long long> counts_;
};

} // namespace maernav
