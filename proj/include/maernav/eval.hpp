#pragma once

#include <memory>
#include <string>
#include <vector>

#include "maernav/learner.hpp"
#include "maernav/rng.hpp"
#include "maernav/sim.hpp"
#include "maernav/world.hpp"

namespace maernav {

/// 1 - 2 T_s / T_max on success, -1 otherwise.
double nav_score(int steps, int max_steps, bool success);

struct TaskResult {
    int task_id = 0;
    Outcome outcome = Outcome::Timeout;
    int steps = 0;
    int max_steps = 400;
    double score = -1.0;
    std::string trajectory;  ///< trajectory log text, empty unless requested
};

struct MetricsReport {
    int tasks = 0;
    double sr = 0.0;
    double cr = 0.0;
    double tr = 0.0;
    double aes_star = 0.0;  ///< NaN when no task succeeded for every method
    int common_successes = 0;
    double mans_mean = 0.0;
    double mans_std = 0.0;
};

/// Decision rule for evaluation rollouts. Implementations must be safe to call concurrently.
class Policy {
public:
    virtual ~Policy() = default;
    virtual Action act(const Observation& obs, const Pose& pose, const TaskSpec& task, Rng& rng) const = 0;
};

/// Deterministic head of a trained actor.
class ActorPolicy : public Policy {
public:
    explicit ActorPolicy(std::shared_ptr<const SacAgent> agent) : agent_(std::move(agent)) {}
    Action act(const Observation& obs, const Pose&, const TaskSpec&, Rng&) const override
    {
        return agent_->act_deterministic(obs);
    }

private:
    std::shared_ptr<const SacAgent> agent_;
};

class ConstantPolicy : public Policy {
public:
    explicit ConstantPolicy(Action a) : a_(a) {}
    Action act(const Observation&, const Pose&, const TaskSpec&, Rng&) const override { return a_; }

private:
    Action a_;
};

/// Turns in place toward the goal until roughly aligned, then drives at full speed while steering.
/// With reverse set it backs toward the goal instead.
class GoalSeekPolicy : public Policy {
public:
    explicit GoalSeekPolicy(RobotSpec spec = {}, bool reverse = false) : spec_(spec), reverse_(reverse) {}
    Action act(const Observation& obs, const Pose& pose, const TaskSpec& task, Rng& rng) const override;

private:
    RobotSpec spec_;
    bool reverse_;
};

struct SuiteOptions {
    std::uint64_t seed = 0;
    int jobs = 1;
    bool keep_trajectories = true;
};

/// Runs every task to termination. Each task draws from its own stream derived from the seed,
/// so results do not depend on the number of jobs.
std::vector<TaskResult> run_task_suite(const Policy& policy, std::shared_ptr<const WorldMap> map,
                                       const std::vector<TaskSpec>& tasks, const SuiteOptions& opt,
                                       const RobotSpec& spec = {}, const RewardConfig& reward = {});

/// One report per method. All methods must cover the same task ids.
std::vector<MetricsReport> compute_metrics(const std::vector<std::vector<TaskResult>>& methods);

struct ChallengeScenario {
    std::string name;
    std::shared_ptr<const WorldMap> map;
    std::vector<TaskSpec> tasks;
};

/// Corridor, wall and garage fixtures on 8 x 8 m maps.
std::vector<ChallengeScenario> build_challenge_scenarios(const RobotSpec& spec = {});

/// The reverse trip: start at the goal with the original heading, head back to the start.
TaskSpec reversed_task(const TaskSpec& t);

// --- Files ---

/// "# task outcome steps score" then one line per task.
std::string format_results(const std::vector<TaskResult>& results);
std::vector<TaskResult> parse_results(const std::string& text);

/// Task lists: one "x y theta gx gy [max_steps]" line per task, '#' comments.
std::string format_tasks(const std::vector<TaskSpec>& tasks);
std::vector<TaskSpec> parse_tasks(const std::string& text);

std::string format_metrics(const MetricsReport& m);

/// Poses from a trajectory log (header and comments skipped).
std::vector<Pose> parse_trajectory(const std::string& text);

struct PlotTrack {
    std::vector<Pose> poses;
    Outcome outcome = Outcome::Timeout;
};

/// Standalone SVG with the map, and one polyline per track colored by outcome.
std::string render_trajectories_svg(const WorldMap& map, const std::vector<PlotTrack>& tracks,
                                    const std::vector<TaskSpec>& tasks = {});

/// Standalone SVG line chart of per-episode returns.
std::string render_returns_svg(const std::vector<double>& returns, const std::string& title);

} // namespace maernav
