// Independent oracles and fixtures shared by the unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <vector>

#include "maernav/eval.hpp"
#include "maernav/replay.hpp"
#include "maernav/rng.hpp"
#include "maernav/sim.hpp"
#include "maernav/world.hpp"

namespace testsupport {

using namespace maernav;

inline double dist_point_segment(Vec2 p, const Segment& s)
{
    const double dx = s.b.x - s.a.x, dy = s.b.y - s.a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (s.a.x + t * dx), p.y - (s.a.y + t * dy));
}

/// Distance from a world point to the footprint rectangle (0 inside).
inline double dist_point_rect(Vec2 p, const Pose& pose, const RobotSpec& spec)
{
    const double c = std::cos(pose.theta), s = std::sin(pose.theta);
    const double lx = c * (p.x - pose.x) + s * (p.y - pose.y);
    const double ly = -s * (p.x - pose.x) + c * (p.y - pose.y);
    const double ox = std::max(std::abs(lx) - spec.length / 2, 0.0);
    const double oy = std::max(std::abs(ly) - spec.width / 2, 0.0);
    return std::hypot(ox, oy);
}

/// Dense point sampling of every segment at the given step, tested against the rectangle.
/// Returns the smallest sample-to-rectangle distance (0 when some sample lies inside).
inline double sampled_clearance(const Pose& pose, const std::vector<Segment>& segs, const RobotSpec& spec,
                                double step)
{
    double best = INFINITY;
    for (const Segment& s : segs) {
        const double len = std::hypot(s.b.x - s.a.x, s.b.y - s.a.y);
        const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
        for (int i = 0; i <= n; ++i) {
            const double t = static_cast<double>(i) / n;
            const Vec2 p{s.a.x + t * (s.b.x - s.a.x), s.a.y + t * (s.b.y - s.a.y)};
            best = std::min(best, dist_point_rect(p, pose, spec));
            if (best == 0.0)
                return 0.0;
        }
    }
    return best;
}

/// Ray-marching range oracle. Sphere tracing on the segment distance field far from obstacles, then
/// fixed steps near them. A step whose ends lie on opposite sides of a segment's line is bisected to
/// the crossing, which counts as a hit when it projects inside the segment.
inline double march_range(Vec2 origin, double angle, const std::vector<Segment>& segs, double max_range,
                          double step)
{
    const Vec2 d{std::cos(angle), std::sin(angle)};
    auto at = [&](double t) { return Vec2{origin.x + t * d.x, origin.y + t * d.y}; };
    auto field = [&](double t) {
        double m = INFINITY;
        for (const Segment& s : segs)
            m = std::min(m, dist_point_segment(at(t), s));
        return m;
    };
    auto side = [](const Segment& s, Vec2 p) {
        return (s.b.x - s.a.x) * (p.y - s.a.y) - (s.b.y - s.a.y) * (p.x - s.a.x);
    };
    auto first_hit = [&](double t0, double t1) {
        double best = INFINITY;
        for (const Segment& s : segs) {
            double lo = t0, hi = t1;
            const double s0 = side(s, at(lo));
            if (s0 * side(s, at(hi)) > 0.0)
                continue;
            if (s0 != 0.0) {
                for (int i = 0; i < 60; ++i) {
                    const double mid = (lo + hi) / 2;
                    (side(s, at(mid)) * s0 > 0.0 ? lo : hi) = mid;
                }
            } else {
                hi = lo;
            }
            const Vec2 p = at(hi);
            const double ex = s.b.x - s.a.x, ey = s.b.y - s.a.y;
            const double u = ((p.x - s.a.x) * ex + (p.y - s.a.y) * ey) / (ex * ex + ey * ey);
            if (u >= 0.0 && u <= 1.0 && dist_point_segment(p, s) <= step)
                best = std::min(best, hi);
        }
        return best;
    };
    if (field(0.0) == 0.0)
        return 0.0;
    double t = 0.0;
    while (t < max_range) {
        const double f = field(t);
        const double adv = f > 4 * step ? f - 2 * step : step;
        const double next = std::min(t + adv, max_range);
        if (adv == step || next == max_range) {
            const double hit = first_hit(t, next);
            if (hit < INFINITY)
                return hit;
        }
        t = next;
    }
    return max_range;
}

/// Random segment soup inside a size x size square, boundary included.
inline std::vector<Segment> random_segments(Rng& rng, double size, int count)
{
    std::vector<Segment> segs = boundary_segments(size, size);
    for (int i = 0; i < count; ++i) {
        const Vec2 a{rng.uniform(0.2, size - 0.2), rng.uniform(0.2, size - 0.2)};
        const double ang = rng.uniform(-std::numbers::pi, std::numbers::pi);
        const double len = rng.uniform(0.3, size / 2);
        Vec2 b{a.x + len * std::cos(ang), a.y + len * std::sin(ang)};
        b.x = std::clamp(b.x, 0.1, size - 0.1);
        b.y = std::clamp(b.y, 0.1, size - 0.1);
        segs.push_back({a, b});
    }
    return segs;
}

inline std::shared_ptr<const WorldMap> empty_room(double size)
{
    WorldMap m;
    m.name = "room";
    m.width = m.height = size;
    ensure_boundary(m);
    return std::make_shared<const WorldMap>(m);
}

/// Empty room with start poses and goals on a lattice, one heading per start cycling through eight.
inline WorldMap annotated_room(double size, double spacing)
{
    WorldMap m = *empty_room(size);
    int k = 0;
    for (double x = 1.0; x <= size - 1.0 + 1e-9; x += spacing)
        for (double y = 1.0; y <= size - 1.0 + 1e-9; y += spacing) {
            m.start_poses.push_back({x, y, wrap_angle(k++ * std::numbers::pi / 4)});
            m.goal_points.push_back({x, y});
        }
    return m;
}

/// Rolls out a policy and records pose transitions. Returns the outcome.
inline Outcome rollout(Environment& env, const TaskSpec& task, const Policy& policy, Rng& rng,
                       std::vector<PoseTransition>& out)
{
    out.clear();
    Observation obs = env.reset(task);
    while (!env.done()) {
        const Pose before = env.pose();
        StepResult s = env.step(policy.act(obs, env.pose(), task, rng));
        const bool terminal = s.outcome == Outcome::Success || s.outcome == Outcome::Crash;
        out.push_back({obs, s.action, s.reward, s.obs, terminal, before, s.pose});
        obs = std::move(s.obs);
    }
    return env.outcome();
}

/// Successful episodes from a rotate-then-drive policy on an empty room.
inline std::vector<std::pair<std::vector<PoseTransition>, Pose>> harvest_successes(int count, std::uint64_t seed)
{
    const auto room = empty_room(10.0);
    Environment env(room);
    GoalSeekPolicy policy;
    Rng rng(seed);
    std::vector<std::pair<std::vector<PoseTransition>, Pose>> out;
    std::vector<PoseTransition> ep;
    while (static_cast<int>(out.size()) < count) {
        TaskSpec t;
        t.start = {rng.uniform(2.0, 8.0), rng.uniform(2.0, 8.0), rng.uniform(-3.14, 3.14)};
        const double r = rng.uniform(1.0, 3.0), a = rng.uniform(-3.14, 3.14);
        t.goal = {std::clamp(t.start.x + r * std::cos(a), 1.0, 9.0), std::clamp(t.start.y + r * std::sin(a), 1.0, 9.0)};
        if (rollout(env, t, policy, rng, ep) == Outcome::Success)
            out.push_back({ep, t.start});
    }
    return out;
}

struct BruteMetrics {
    double sr, cr, tr, aes, mans_mean, mans_std;
    int common;
};

/// Straightforward recomputation of the metric suite from raw per-method result lists.
inline std::vector<BruteMetrics> brute_metrics(const std::vector<std::vector<TaskResult>>& methods)
{
    std::set<int> ids;
    for (const auto& r : methods[0])
        ids.insert(r.task_id);
    std::vector<int> common;
    for (int id : ids) {
        bool all = true;
        for (const auto& m : methods) {
            const auto it = std::find_if(m.begin(), m.end(), [&](const TaskResult& r) { return r.task_id == id; });
            all = all && it != m.end() && it->outcome == Outcome::Success;
        }
        if (all)
            common.push_back(id);
    }
    std::vector<BruteMetrics> out;
    for (const auto& m : methods) {
        std::map<int, TaskResult> by;
        for (const auto& r : m)
            by[r.task_id] = r;
        double s = 0, c = 0, t = 0, sum = 0;
        for (const auto& [id, r] : by) {
            s += r.outcome == Outcome::Success;
            c += r.outcome == Outcome::Crash;
            t += r.outcome == Outcome::Timeout;
            sum += r.score;
        }
        const double n = static_cast<double>(by.size());
        const double mean = sum / n;
        double var = 0;
        for (const auto& [id, r] : by)
            var += (r.score - mean) * (r.score - mean);
        double aes = NAN;
        if (!common.empty()) {
            double steps = 0;
            for (int id : common)
                steps += by.at(id).steps;
            aes = steps / static_cast<double>(common.size());
        }
        out.push_back({s / n, c / n, t / n, aes, mean, std::sqrt(var / n), static_cast<int>(common.size())});
    }
    return out;
}

} // namespace testsupport
