#include "maernav/robot.hpp"

#include <algorithm>
#include <cmath>

#include "maernav/error.hpp"

namespace maernav {

void RobotSpec::validate() const
{
    if (!(length > 0.0 && width > 0.0))
        throw ConfigError("robot footprint must have positive size");
    if (!(dt > 0.0))
        throw ConfigError("dt must be positive");
    if (!(v_max > 0.0 && w_max > 0.0))
        throw ConfigError("velocity limits must be positive");
    if (minpool_sectors < 1 || lidar_beams < minpool_sectors)
        throw ConfigError("need lidar_beams >= minpool_sectors >= 1");
    if (!(lidar_max_range > 0.0))
        throw ConfigError("lidar_max_range must be positive");
}

Action clamp_action(Action a, const RobotSpec& spec)
{
    return {std::clamp(a.v, -spec.v_max, spec.v_max), std::clamp(a.w, -spec.w_max, spec.w_max)};
}

std::array<Vec2, 4> footprint_corners(const Pose& p, const RobotSpec& spec)
{
    const double hl = 0.5 * spec.length;
    const double hw = 0.5 * spec.width;
    const double c = std::cos(p.theta);
    const double s = std::sin(p.theta);
    const std::array<Vec2, 4> local = {Vec2{hl, -hw}, Vec2{hl, hw}, Vec2{-hl, hw}, Vec2{-hl, -hw}};
    std::array<Vec2, 4> out;
    for (std::size_t i = 0; i < 4; ++i)
        out[i] = {p.x + c * local[i].x - s * local[i].y, p.y + s * local[i].x + c * local[i].y};
    return out;
}

bool footprint_collides(const Pose& p, std::span<const Segment> segments, const RobotSpec& spec)
{
    const double hl = 0.5 * spec.length;
    const double hw = 0.5 * spec.width;
    const double c = std::cos(p.theta);
    const double s = std::sin(p.theta);
    const double reach = std::hypot(hl, hw);
    const Vec2 center{p.x, p.y};
    auto to_local = [&](Vec2 q) {
        const Vec2 d = q - center;
        return Vec2{c * d.x + s * d.y, -s * d.x + c * d.y};
    };
    for (const Segment& seg : segments) {
        if (point_segment_distance(center, seg) > reach + 1e-9)
            continue;
        if (segment_touches_box({to_local(seg.a), to_local(seg.b)}, hl, hw))
            return true;
    }
    return false;
}

} // namespace maernav
