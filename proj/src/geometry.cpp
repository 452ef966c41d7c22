#include "maernav/geometry.hpp"

#include <algorithm>

namespace maernav {

std::optional<double> ray_segment_hit(Vec2 origin, Vec2 dir, const Segment& s)
{
    const Vec2 e = s.b - s.a;
    const Vec2 w = s.a - origin;
    const double denom = cross(dir, e);
    if (denom == 0.0) {
        // Parallel: only a collinear overlap can be hit, at its nearest endpoint.
        if (cross(w, dir) != 0.0)
            return std::nullopt;
        const double ta = dot(s.a - origin, dir);
        const double tb = dot(s.b - origin, dir);
        if (ta < 0.0 && tb < 0.0)
            return std::nullopt;
        if (ta <= 0.0 || tb <= 0.0)
            return 0.0;
        return std::min(ta, tb);
    }
    const double t = cross(w, e) / denom;
    const double u = cross(w, dir) / denom;
    if (t < 0.0 || u < 0.0 || u > 1.0)
        return std::nullopt;
    return t;
}

double point_segment_distance(Vec2 p, const Segment& s)
{
    const Vec2 e = s.b - s.a;
    const double len2 = dot(e, e);
    double t = len2 > 0.0 ? dot(p - s.a, e) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm(p - (s.a + t * e));
}

bool segment_touches_box(const Segment& s, double hx, double hy)
{
    // Liang-Barsky clipping of the parametric segment against the closed box.
    double t0 = 0.0;
    double t1 = 1.0;
    const Vec2 d = s.b - s.a;
    const double p[4] = {-d.x, d.x, -d.y, d.y};
    const double q[4] = {s.a.x + hx, hx - s.a.x, s.a.y + hy, hy - s.a.y};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0)
                return false;
            continue;
        }
        const double r = q[i] / p[i];
        if (p[i] < 0.0)
            t0 = std::max(t0, r);
        else
            t1 = std::min(t1, r);
        if (t0 > t1)
            return false;
    }
    return true;
}

} // namespace maernav
