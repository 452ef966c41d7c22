#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "maernav/rng.hpp"
#include "maernav/sim.hpp"

namespace maernav {

struct Transition {
    Observation obs;
    Action action;
    double reward = 0.0;
    Observation next_obs;
    bool done = false;

    friend bool operator==(const Transition&, const Transition&) = default;
};

/// Transition plus the global poses before and after the action.
struct PoseTransition {
    Observation obs;
    Action action;
    double reward = 0.0;
    Observation next_obs;
    bool done = false;
    Pose pose;
    Pose next_pose;

    Transition transition() const { return {obs, action, reward, next_obs, done}; }
};

/// Fixed-capacity ring of transitions stored flat; the oldest record is overwritten first.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::size_t obs_dim);

    void push(const Transition& t);
    Transition at(std::size_t i) const;  ///< i-th record in insertion order among those retained

    std::vector<Transition> sample_minibatch(std::size_t n, Rng& rng) const;
    std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;

    /// Raw slot access for batch assembly; slot order is storage order.
    const double* slot(std::size_t slot) const { return data_.data() + slot * stride_; }

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t obs_dim() const { return obs_dim_; }
    std::size_t cursor() const { return cursor_; }
    std::size_t stride() const { return stride_; }
    bool empty() const { return size_ == 0; }
    void clear();

    /// Flat storage for checkpoints: size() * stride() values in slot order.
    const std::vector<double>& raw() const { return data_; }
    void restore(std::vector<double> raw, std::size_t size, std::size_t cursor);

private:
    std::size_t capacity_;
    std::size_t obs_dim_;
    std::size_t stride_;
    std::size_t size_ = 0;
    std::size_t cursor_ = 0;
    std::vector<double> data_;
};

// --- Mirror augmentation ---

Action negate_action(Action a);

struct MirrorReward {
    double reward = 0.0;
    bool done = false;
};

MirrorReward mirror_reward(double d_cur, double d_next, const RewardConfig& cfg);

/// Synthetic reverse-direction transitions for a successful episode, emitted from the
/// original goal back toward the start. The start position becomes the goal.
std::vector<Transition> mirror_episode(const std::vector<PoseTransition>& episode, const Pose& start_pose,
                                       const RewardConfig& cfg = {});

/// Episode-scoped pose buffer, cleared at every episode boundary.
class MirrorBuffer {
public:
    void push(PoseTransition t) { records_.push_back(std::move(t)); }
    const std::vector<PoseTransition>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    void clear() { records_.clear(); }

private:
    std::vector<PoseTransition> records_;
};

/// On success pushes the mirrored episode into the standard buffer; clears the mirror buffer
/// either way. Returns the number of synthetic transitions added.
std::size_t on_episode_end(bool success, ReplayBuffer& buffer, MirrorBuffer& mirror, const Pose& start_pose,
                           const RewardConfig& cfg = {});

// --- Dump format ---

/// Line-delimited text dump: a header line, then one record per transition.
std::string dump_transitions(const std::vector<Transition>& records);
std::vector<Transition> parse_transition_dump(const std::string& text);
std::string dump_buffer(const ReplayBuffer& buffer);

} // namespace maernav
