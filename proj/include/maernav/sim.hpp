#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maernav/geometry.hpp"
#include "maernav/robot.hpp"
#include "maernav/world.hpp"

namespace maernav {

/// Agent input: min-pooled ranges, goal in polar robot-frame coordinates, current velocities.
struct Observation {
    std::vector<double> lidar;
    double goal_d = 0.0;
    double goal_phi = 0.0;
    double v = 0.0;
    double w = 0.0;

    /// Flat layout [lidar..., goal_d, goal_phi, v, w].
    std::vector<double> flatten() const;
    void flatten_into(std::span<double> out) const;
    static Observation from_flat(std::span<const double> flat);
    std::size_t dim() const { return lidar.size() + 4; }

    friend bool operator==(const Observation&, const Observation&) = default;
};

struct RewardConfig {
    double c1 = 2.0;
    double success_reward = 10.0;
    double crash_reward = -10.0;
    double gamma = 0.99;
    double epsilon_goal = 0.2;

    void validate() const;
};

enum class Outcome { Running, Success, Crash, Timeout };

std::string_view outcome_name(Outcome o);
Outcome parse_outcome(std::string_view s);

struct GoalPolar {
    double d = 0.0;
    double phi = 0.0;
};

// --- Kinematics and sensing ---

/// Exact arc integration of the unicycle model over dt.
Pose integrate_unicycle(const Pose& p, Action a, double dt);

bool footprint_collides(const Pose& p, const WorldMap& map, const RobotSpec& spec);

/// Full-resolution scan; beam k points along theta + fov * k / beams.
std::vector<double> cast_lidar(const Pose& p, std::span<const Segment> segments, const RobotSpec& spec);
inline std::vector<double> cast_lidar(const Pose& p, const WorldMap& map, const RobotSpec& spec)
{
    return cast_lidar(p, map.segments, spec);
}

/// Minimum over m contiguous sectors; the last sector absorbs the remainder.
std::vector<double> minpool(std::span<const double> scan, int m);

GoalPolar relative_goal(const Pose& p, Vec2 goal);

double compute_reward(double d_t, double d_next, Outcome outcome, const RewardConfig& cfg);

// --- Episode engine ---

struct StepResult {
    Observation obs;
    double reward = 0.0;
    Outcome outcome = Outcome::Running;
    bool done = false;
    Pose pose;
    Action action;  ///< the clamped command actually executed
};

/// Single-threaded episode engine over a shared immutable map.
class Environment {
public:
    explicit Environment(std::shared_ptr<const WorldMap> map, RobotSpec spec = {}, RewardConfig reward = {});

    Observation reset(const TaskSpec& task);
    StepResult step(Action a);

    Observation observe(Action last) const;

    const Pose& pose() const { return pose_; }
    const TaskSpec& task() const { return task_; }
    int steps() const { return steps_; }
    Outcome outcome() const { return outcome_; }
    bool done() const { return outcome_ != Outcome::Running; }
    bool active() const { return active_; }
    double goal_distance() const;

    const WorldMap& map() const { return *map_; }
    const RobotSpec& spec() const { return spec_; }
    const RewardConfig& reward_config() const { return reward_; }

private:
    std::shared_ptr<const WorldMap> map_;
    RobotSpec spec_;
    RewardConfig reward_;
    TaskSpec task_;
    Pose pose_;
    int steps_ = 0;
    Outcome outcome_ = Outcome::Running;
    bool active_ = false;
};

/// One line of the trajectory log, 9 significant digits per number.
std::string format_trajectory_record(int step, const Pose& p, Action a, double reward, Outcome kind);
inline constexpr std::string_view kTrajectoryHeader = "# step x y theta v w reward done\n";

} // namespace maernav
