#pragma once

#include <cmath>
#include <numbers>
#include <optional>

namespace maernav {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct Segment {
    Vec2 a;
    Vec2 b;
    friend bool operator==(const Segment&, const Segment&) = default;
};

/// Planar robot configuration; theta lives in (-pi, pi].
struct Pose {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    friend bool operator==(const Pose&, const Pose&) = default;
};

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a)
{
    double r = std::remainder(a, 2.0 * std::numbers::pi);
    if (r <= -std::numbers::pi)
        r += 2.0 * std::numbers::pi;
    return r;
}

/// Distance along the ray origin + t*dir (dir unit length) to the segment, if hit with t >= 0.
std::optional<double> ray_segment_hit(Vec2 origin, Vec2 dir, const Segment& s);

/// Closest distance from a point to a segment.
double point_segment_distance(Vec2 p, const Segment& s);

/// True iff the segment touches the closed axis-aligned box [-hx,hx] x [-hy,hy].
bool segment_touches_box(const Segment& s, double hx, double hy);

} // namespace maernav
