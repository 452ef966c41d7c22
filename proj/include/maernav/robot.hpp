#pragma once

#include <array>
#include <numbers>
#include <span>

#include "maernav/geometry.hpp"

namespace maernav {

/// Velocity command for the differential-drive base.
struct Action {
    double v = 0.0;  ///< linear, m/s
    double w = 0.0;  ///< angular, rad/s
    friend bool operator==(const Action&, const Action&) = default;
};

/// Rectangular differential-drive robot with a planar 360 degree LiDAR.
struct RobotSpec {
    double length = 0.62;
    double width = 0.64;
    double v_max = 0.5;
    double w_max = std::numbers::pi / 2.0;
    double dt = 0.1;
    double lidar_fov = 2.0 * std::numbers::pi;
    int lidar_beams = 1667;
    double lidar_max_range = 30.0;
    int minpool_sectors = 36;
    /// Sensor offset along the heading from the drive center.
    double lidar_offset = 0.0;

    void validate() const;
};

Action clamp_action(Action a, const RobotSpec& spec);

/// World-frame corners of the footprint, counter-clockwise starting front-right.
std::array<Vec2, 4> footprint_corners(const Pose& p, const RobotSpec& spec);

/// True iff any segment intersects or lies inside the footprint rectangle.
bool footprint_collides(const Pose& p, std::span<const Segment> segments, const RobotSpec& spec);

} // namespace maernav
