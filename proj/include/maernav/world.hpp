#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "maernav/geometry.hpp"
#include "maernav/robot.hpp"

namespace maernav {

/// Segment-soup obstacle map with annotated start poses and goal points.
/// Immutable once validated; share it freely between episode engines.
struct WorldMap {
    std::string name = "unnamed";
    double width = 0.0;
    double height = 0.0;
    std::vector<Segment> segments;
    std::vector<Pose> start_poses;
    std::vector<Vec2> goal_points;

    friend bool operator==(const WorldMap&, const WorldMap&) = default;
};

struct TaskSpec {
    Pose start;
    Vec2 goal;
    int max_steps = 400;
};

/// The four closed-world boundary walls of a width x height map.
std::vector<Segment> boundary_segments(double width, double height);

/// Adds any missing boundary walls (at the front of the segment list).
void ensure_boundary(WorldMap& map);

/// Throws ValidationError naming the first violated invariant.
void validate_map(const WorldMap& map, const RobotSpec& spec = {});
void validate_task(const WorldMap& map, const TaskSpec& task, const RobotSpec& spec = {});

/// Parses the line-oriented scenario format; boundary walls are added if absent.
WorldMap load_scenario(std::string_view text, const RobotSpec& spec = {});
std::string serialize_scenario(const WorldMap& map);

WorldMap load_scenario_file(const std::filesystem::path& path, const RobotSpec& spec = {});
void save_scenario_file(const WorldMap& map, const std::filesystem::path& path);

inline constexpr int kGridSize = 5;

/// Side length of training map (row, col).
double training_map_size(int row, int col);

/// The 5x5 grid of procedurally furnished training maps, row-major.
std::vector<WorldMap> generate_training_grid();

} // namespace maernav
