#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "maernav/nn.hpp"
#include "maernav/replay.hpp"
#include "maernav/robot.hpp"
#include "maernav/sim.hpp"

namespace maernav {

/// Elementwise q_i = 1 / (l_i + beta). Throws DomainError on a nonpositive denominator.
std::vector<double> lidar_prior(std::span<const double> ranges, double beta);

/// Hyperparameters of the soft actor-critic learner.
struct SacConfig {
    int hidden_width = 256;
    int hidden_layers = 4;
    double leaky_slope = 0.01;
    int components = 3;
    double beta_init = 1.0;
    double lr_actor = 3e-4;
    double lr_critic = 3e-4;
    double lr_alpha = 3e-4;
    int batch_size = 256;
    double tau = 0.005;
    double gamma = 0.99;
    double target_entropy = -2.0;
    double init_alpha = 0.2;

    void validate() const;
};

/// Gaussian mixture over the 2-D pre-squash action for a single observation.
struct Mixture {
    std::vector<double> weights;
    std::vector<std::array<double, 2>> means;
    std::vector<std::array<double, 2>> stds;

    int components() const { return static_cast<int>(weights.size()); }
};

/// Per-sample randomness of a reparameterized mixture draw.
struct MixtureNoise {
    std::vector<int> component;
    nn::Matrix eps;  ///< 2 x B standard normals
};

/// Batched squashed-mixture sample with everything the backward pass needs.
struct SquashedSample {
    nn::Matrix action;    ///< 2 x B, physical units
    nn::Vector log_prob;  ///< B
    nn::Matrix u;         ///< pre-squash draw
    nn::Matrix resp;      ///< K x B posterior responsibilities of u
    nn::Matrix weights;   ///< K x B mixture weights
    nn::Matrix log_std;   ///< 2K x B clamped
    MixtureNoise noise;
};

class ActorNet {
public:
    ActorNet() = default;
    ActorNet(int sectors, const SacConfig& cfg, Rng& rng);

    int sectors() const { return sectors_; }
    int components() const { return components_; }
    int obs_dim() const { return sectors_ + 4; }

    /// Network input [q..., d, phi, v, w] for a batch of flat observations.
    nn::Matrix input(const nn::Matrix& obs) const;

    /// Head outputs (5K x B): K logits, 2K means, 2K raw log-stds.
    nn::Matrix head(const nn::Matrix& obs, nn::Mlp::Cache* cache = nullptr) const;

    Mixture mixture(const Observation& obs) const;

    void zero_grad();
    std::vector<nn::ParamRef> params(const std::string& prefix = "actor");

    double beta = 1.0;
    double grad_beta = 0.0;
    nn::Mlp body;

private:
    int sectors_ = 0;
    int components_ = 0;
};

class CriticNet {
public:
    CriticNet() = default;
    CriticNet(int sectors, const SacConfig& cfg, Rng& rng);

    int sectors() const { return sectors_; }

    /// Network input [q..., d, phi, v, w, action_v, action_w].
    nn::Matrix input(const nn::Matrix& obs, const nn::Matrix& action) const;

    /// 1 x B values.
    nn::Matrix forward(const nn::Matrix& obs, const nn::Matrix& action, nn::Mlp::Cache* cache = nullptr) const;

    /// Backprop of dQ (1 x B). Accumulates parameter gradients (including beta) when requested and
    /// returns dQ/daction (2 x B).
    nn::Matrix backward(const nn::Matrix& dq, const nn::Matrix& obs, const nn::Mlp::Cache& cache, bool accumulate);

    void zero_grad();
    std::vector<nn::ParamRef> params(const std::string& prefix);

    double beta = 1.0;
    double grad_beta = 0.0;
    nn::Mlp body;

private:
    int sectors_ = 0;
};

// --- Mixture policy ---

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

Mixture forward_actor(const ActorNet& actor, const Observation& obs);

/// Mixture for column b of a head matrix.
Mixture mixture_from_head(const nn::Matrix& head, int components, Eigen::Index col = 0);

MixtureNoise draw_noise(const nn::Matrix& head, int components, Rng& rng);

SquashedSample squash_sample(const nn::Matrix& head, int components, const MixtureNoise& noise,
                             std::array<double, 2> scale);

/// Gradient of sum_b (g_action_b . a_b + g_logp_b * logpi_b) w.r.t. the head (5K x B).
nn::Matrix squash_backward(const nn::Matrix& head, const SquashedSample& s, const nn::Matrix& g_action,
                           const nn::Vector& g_logp, std::array<double, 2> scale);

std::pair<Action, double> sample_action(const Mixture& mix, Rng& rng, const RobotSpec& spec = {});
Action deterministic_action(const Mixture& mix, const RobotSpec& spec = {});

/// Log-density of a squashed, scaled action strictly inside the action box.
double mixture_log_prob(const Mixture& mix, Action a, const RobotSpec& spec = {});

// --- Training ---

struct Batch {
    nn::Matrix obs;       ///< D x B
    nn::Matrix action;    ///< 2 x B
    nn::Vector reward;    ///< B
    nn::Matrix next_obs;  ///< D x B
    nn::Vector done;      ///< B, 0 or 1
    Eigen::Index size() const { return obs.cols(); }
};

Batch make_batch(const std::vector<Transition>& records);
Batch make_batch(const ReplayBuffer& buffer, const std::vector<std::size_t>& slots);

struct LossReport {
    double critic1 = 0.0;
    double critic2 = 0.0;
    double actor = 0.0;
    double alpha_loss = 0.0;
    double alpha = 0.0;
};

/// r + gamma (1 - done) (min_q - alpha * logp).
double critic_target(double r, double gamma, bool done, double min_q_next, double alpha, double logp_next);

class SacAgent {
public:
    SacAgent(int sectors, const SacConfig& cfg, const RobotSpec& spec, Rng& init_rng);

    LossReport update(const Batch& batch, Rng& rng);

    Action act(const Observation& obs, Rng& rng) const;
    Action act_deterministic(const Observation& obs) const;

    double alpha() const { return std::exp(log_alpha); }
    const SacConfig& config() const { return cfg_; }
    const RobotSpec& spec() const { return spec_; }
    std::array<double, 2> action_scale() const { return {spec_.v_max, spec_.w_max}; }

    /// Every named parameter array, including target networks and optimizer moments.
    struct NamedArray {
        std::string name;
        std::vector<std::size_t> shape;
        double* data;
        std::size_t size;
    };
    std::vector<NamedArray> state_arrays();

    ActorNet actor;
    CriticNet q1, q2, q1_target, q2_target;
    double log_alpha = 0.0;
    double grad_log_alpha = 0.0;
    nn::Adam actor_opt, q1_opt, q2_opt, alpha_opt;

    std::vector<nn::ParamRef> alpha_params();

private:
    SacConfig cfg_;
    RobotSpec spec_;
};

// --- Gradient verification ---

struct GradientCheckReport {
    double actor_max_rel_error = 0.0;
    double critic_max_rel_error = 0.0;
    double beta_actor_grad = 0.0;
    double beta_critic_grad = 0.0;
    double max_rel_error() const { return std::max(actor_max_rel_error, critic_max_rel_error); }
};

/// Relative error |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-4);

/// Central-difference comparison over every parameter of actor and critic. The actor objective is
/// sum_b (c_lp logpi_b + c_a . a_b) under fixed mixture noise; the critic objective is sum_b c_b Q_b.
GradientCheckReport gradient_check(ActorNet& actor, CriticNet& critic, const nn::Matrix& obs,
                                   const nn::Matrix& action, std::uint64_t seed, double step = 1e-5,
                                   const RobotSpec& spec = {});

/// Central-difference max relative error of f over the given parameters against their stored grads.
double max_param_rel_error(const std::vector<nn::ParamRef>& params, const std::function<double()>& f,
                           double step = 1e-5, double floor = 1e-4);

} // namespace maernav
