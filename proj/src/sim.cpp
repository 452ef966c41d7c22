#include "maernav/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "maernav/error.hpp"
#include "maernav/textio.hpp"

namespace maernav {

std::vector<double> Observation::flatten() const
{
    std::vector<double> out(dim());
    flatten_into(out);
    return out;
}

void Observation::flatten_into(std::span<double> out) const
{
    std::copy(lidar.begin(), lidar.end(), out.begin());
    const std::size_t m = lidar.size();
    out[m] = goal_d;
    out[m + 1] = goal_phi;
    out[m + 2] = v;
    out[m + 3] = w;
}

Observation Observation::from_flat(std::span<const double> flat)
{
    if (flat.size() < 4)
        throw DomainError("flat observation needs at least 4 entries");
    const std::size_t m = flat.size() - 4;
    Observation o;
    o.lidar.assign(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(m));
    o.goal_d = flat[m];
    o.goal_phi = flat[m + 1];
    o.v = flat[m + 2];
    o.w = flat[m + 3];
    return o;
}

void RewardConfig::validate() const
{
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw ConfigError("gamma must lie in [0, 1)");
    if (!(epsilon_goal > 0.0))
        throw ConfigError("epsilon_goal must be positive");
}

std::string_view outcome_name(Outcome o)
{
    switch (o) {
    case Outcome::Running: return "running";
    case Outcome::Success: return "success";
    case Outcome::Crash: return "crash";
    case Outcome::Timeout: return "timeout";
    }
    return "running";
}

Outcome parse_outcome(std::string_view s)
{
    if (s == "success")
        return Outcome::Success;
    if (s == "crash")
        return Outcome::Crash;
    if (s == "timeout")
        return Outcome::Timeout;
    if (s == "running")
        return Outcome::Running;
    throw Error(ErrorKind::Parse, "unknown outcome '" + std::string(s) + "'");
}

Pose integrate_unicycle(const Pose& p, Action a, double dt)
{
    const double turn = a.w * dt;
    const double dist = a.v * dt;
    if (std::abs(a.w) < 1e-9) {
        return {p.x + dist * std::cos(p.theta), p.y + dist * std::sin(p.theta), wrap_angle(p.theta + turn)};
    }
    // Chord form of the arc, (v/w)(sin(th + w dt) - sin th) = v dt sinc(w dt / 2) cos(th + w dt / 2),
    // which stays well conditioned as w -> 0.
    const double half = 0.5 * turn;
    const double chord = dist * std::sin(half) / half;
    const double mid = p.theta + half;
    return {p.x + chord * std::cos(mid), p.y + chord * std::sin(mid), wrap_angle(p.theta + turn)};
}

bool footprint_collides(const Pose& p, const WorldMap& map, const RobotSpec& spec)
{
    return footprint_collides(p, std::span<const Segment>(map.segments), spec);
}

std::vector<double> cast_lidar(const Pose& p, std::span<const Segment> segments, const RobotSpec& spec)
{
    const int n = spec.lidar_beams;
    const double step = spec.lidar_fov / n;
    const double range = spec.lidar_max_range;
    const Vec2 origin{p.x + spec.lidar_offset * std::cos(p.theta), p.y + spec.lidar_offset * std::sin(p.theta)};

    std::vector<double> out(static_cast<std::size_t>(n), range);
    std::vector<Vec2> dirs(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double a = p.theta + step * k;
        dirs[static_cast<std::size_t>(k)] = {std::cos(a), std::sin(a)};
    }

    auto probe = [&](int k, const Segment& seg) {
        const auto idx = static_cast<std::size_t>(((k % n) + n) % n);
        if (auto t = ray_segment_hit(origin, dirs[idx], seg); t && *t < out[idx])
            out[idx] = *t;
    };

    for (const Segment& seg : segments) {
        if (point_segment_distance(origin, seg) >= range)
            continue;
        const Vec2 a = seg.a - origin;
        const Vec2 b = seg.b - origin;
        const double span = std::atan2(cross(a, b), dot(a, b));  // signed angle a -> b
        // Origin on the segment's line between the endpoints: no angular culling possible.
        if (std::abs(span) >= std::numbers::pi - 1e-9 || norm(a) == 0.0 || norm(b) == 0.0) {
            for (int k = 0; k < n; ++k)
                probe(k, seg);
            continue;
        }
        const double start = std::atan2(span >= 0.0 ? a.y : b.y, span >= 0.0 ? a.x : b.x);
        const double rel = wrap_angle(start - p.theta);  // beam-space start angle
        const int k0 = static_cast<int>(std::floor(rel / step)) - 1;
        const int k1 = static_cast<int>(std::ceil((rel + std::abs(span)) / step)) + 1;
        for (int k = k0; k <= std::min(k1, k0 + n - 1); ++k)
            probe(k, seg);
    }
    return out;
}

std::vector<double> minpool(std::span<const double> scan, int m)
{
    if (m < 1)
        throw DomainError("minpool needs at least one sector");
    const std::size_t n = scan.size();
    if (static_cast<std::size_t>(m) > n)
        throw DomainError("more sectors than beams");
    const std::size_t width = n / static_cast<std::size_t>(m);
    std::vector<double> out(static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::size_t lo = i * width;
        const std::size_t hi = (i + 1 == out.size()) ? n : lo + width;
        out[i] = *std::min_element(scan.begin() + static_cast<std::ptrdiff_t>(lo),
                                   scan.begin() + static_cast<std::ptrdiff_t>(hi));
    }
    return out;
}

GoalPolar relative_goal(const Pose& p, Vec2 goal)
{
    const double dx = goal.x - p.x;
    const double dy = goal.y - p.y;
    // Rotate into the robot frame before atan2 so the heading never gets added to an angle.
    const double c = std::cos(p.theta);
    const double s = std::sin(p.theta);
    return {std::hypot(dx, dy), wrap_angle(std::atan2(-s * dx + c * dy, c * dx + s * dy))};
}

double compute_reward(double d_t, double d_next, Outcome outcome, const RewardConfig& cfg)
{
    switch (outcome) {
    case Outcome::Success: return cfg.success_reward;
    case Outcome::Crash: return cfg.crash_reward;
    default: return cfg.c1 * (d_t - d_next);
    }
}

// --- Environment ---

Environment::Environment(std::shared_ptr<const WorldMap> map, RobotSpec spec, RewardConfig reward)
    : map_(std::move(map)), spec_(spec), reward_(reward)
{
    if (!map_)
        throw DomainError("environment needs a map");
    spec_.validate();
    reward_.validate();
}

Observation Environment::reset(const TaskSpec& task)
{
    if (task.max_steps < 1)
        throw ValidationError("task max_steps must be >= 1");
    task_ = task;
    pose_ = task.start;
    pose_.theta = wrap_angle(pose_.theta);
    steps_ = 0;
    outcome_ = Outcome::Running;
    active_ = true;
    return observe({0.0, 0.0});
}

double Environment::goal_distance() const
{
    return std::hypot(task_.goal.x - pose_.x, task_.goal.y - pose_.y);
}

Observation Environment::observe(Action last) const
{
    Observation o;
    o.lidar = minpool(cast_lidar(pose_, *map_, spec_), spec_.minpool_sectors);
    const GoalPolar g = relative_goal(pose_, task_.goal);
    o.goal_d = g.d;
    o.goal_phi = g.phi;
    o.v = last.v;
    o.w = last.w;
    return o;
}

StepResult Environment::step(Action a)
{
    if (!active_)
        throw StateError("step before reset");
    if (done())
        throw StateError("step on a finished episode");
    a = clamp_action(a, spec_);
    const double d_t = goal_distance();
    pose_ = integrate_unicycle(pose_, a, spec_.dt);
    ++steps_;
    const double d_next = goal_distance();

    if (footprint_collides(pose_, *map_, spec_))
        outcome_ = Outcome::Crash;
    else if (d_next < reward_.epsilon_goal)
        outcome_ = Outcome::Success;
    else if (steps_ >= task_.max_steps)
        outcome_ = Outcome::Timeout;

    StepResult r;
    r.reward = compute_reward(d_t, d_next, outcome_, reward_);
    r.outcome = outcome_;
    r.done = done();
    r.pose = pose_;
    r.action = a;
    r.obs = observe(a);
    return r;
}

std::string format_trajectory_record(int step, const Pose& p, Action a, double reward, Outcome kind)
{
    using textio::format_g9;
    std::string s = std::to_string(step);
    for (double v : {p.x, p.y, p.theta, a.v, a.w, reward}) {
        s += ' ';
        s += format_g9(v);
    }
    s += ' ';
    s += outcome_name(kind);
    s += '\n';
    return s;
}

} // namespace maernav
