#include "maernav/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "maernav/error.hpp"
#include "maernav/rng.hpp"
#include "maernav/textio.hpp"

namespace maernav {

namespace {

constexpr std::uint64_t kGridSeed = 0x4d414552ULL;

bool same_segment(const Segment& a, const Segment& b)
{
    return (a.a == b.a && a.b == b.b) || (a.a == b.b && a.b == b.a);
}

bool inside_closed(Vec2 p, double w, double h)
{
    return p.x >= 0.0 && p.x <= w && p.y >= 0.0 && p.y <= h;
}

bool inside_open(Vec2 p, double w, double h)
{
    return p.x > 0.0 && p.x < w && p.y > 0.0 && p.y < h;
}

std::string fmt_point(Vec2 p)
{
    return "(" + textio::format_double(p.x) + ", " + textio::format_double(p.y) + ")";
}

} // namespace

std::vector<Segment> boundary_segments(double width, double height)
{
    return {
        {{0.0, 0.0}, {width, 0.0}},
        {{width, 0.0}, {width, height}},
        {{width, height}, {0.0, height}},
        {{0.0, height}, {0.0, 0.0}},
    };
}

void ensure_boundary(WorldMap& map)
{
    std::vector<Segment> missing;
    for (const Segment& b : boundary_segments(map.width, map.height)) {
        const bool present = std::any_of(map.segments.begin(), map.segments.end(),
                                         [&](const Segment& s) { return same_segment(s, b); });
        if (!present)
            missing.push_back(b);
    }
    map.segments.insert(map.segments.begin(), missing.begin(), missing.end());
}

void validate_map(const WorldMap& map, const RobotSpec& spec)
{
    if (!(map.width > 0.0 && map.height > 0.0) || !std::isfinite(map.width) || !std::isfinite(map.height))
        throw ValidationError("map size must be positive and finite");
    for (const Segment& b : boundary_segments(map.width, map.height)) {
        if (std::none_of(map.segments.begin(), map.segments.end(),
                         [&](const Segment& s) { return same_segment(s, b); }))
            throw ValidationError("boundary segment missing");
    }
    for (const Segment& s : map.segments) {
        if (!inside_closed(s.a, map.width, map.height) || !inside_closed(s.b, map.width, map.height))
            throw ValidationError("segment out of bounds: " + fmt_point(s.a) + "-" + fmt_point(s.b));
    }
    for (const Pose& p : map.start_poses) {
        if (!inside_open({p.x, p.y}, map.width, map.height))
            throw ValidationError("start pose outside map: " + fmt_point({p.x, p.y}));
        if (!(p.theta > -std::numbers::pi && p.theta <= std::numbers::pi))
            throw ValidationError("start heading not in (-pi, pi]");
        if (footprint_collides(p, map.segments, spec))
            throw ValidationError("start pose in collision: " + fmt_point({p.x, p.y}));
    }
    for (Vec2 g : map.goal_points) {
        if (!inside_open(g, map.width, map.height))
            throw ValidationError("goal outside map: " + fmt_point(g));
        for (const Segment& s : map.segments) {
            if (point_segment_distance(g, s) <= 1e-9)
                throw ValidationError("goal on obstacle: " + fmt_point(g));
        }
    }
}

void validate_task(const WorldMap& map, const TaskSpec& task, const RobotSpec& spec)
{
    if (task.max_steps < 1)
        throw ValidationError("task max_steps must be >= 1");
    if (!inside_open(task.goal, map.width, map.height))
        throw ValidationError("task goal outside map: " + fmt_point(task.goal));
    if (!inside_open({task.start.x, task.start.y}, map.width, map.height))
        throw ValidationError("task start outside map");
    if (footprint_collides(task.start, map.segments, spec))
        throw ValidationError("task start in collision: " + fmt_point({task.start.x, task.start.y}));
}

WorldMap load_scenario(std::string_view text, const RobotSpec& spec)
{
    WorldMap map;
    bool have_size = false;
    int lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = textio::strip_comment(text.substr(pos, end - pos));
        pos = end + 1;
        ++lineno;
        if (line.empty())
            continue;
        const auto tok = textio::split_ws(line);
        const std::string_view cmd = tok[0];
        auto numbers = [&](std::size_t count) {
            if (tok.size() != count + 1)
                throw ParseError(lineno, "'" + std::string(cmd) + "' expects " + std::to_string(count) +
                                             " values, got " + std::to_string(tok.size() - 1));
            std::vector<double> v(count);
            for (std::size_t i = 0; i < count; ++i) {
                if (!textio::parse_double(tok[i + 1], v[i]) || !std::isfinite(v[i]))
                    throw ParseError(lineno, "bad number '" + std::string(tok[i + 1]) + "'");
            }
            return v;
        };
        if (cmd == "size") {
            if (have_size)
                throw ParseError(lineno, "duplicate 'size'");
            const auto v = numbers(2);
            map.width = v[0];
            map.height = v[1];
            have_size = true;
        } else if (cmd == "segment") {
            const auto v = numbers(4);
            map.segments.push_back({{v[0], v[1]}, {v[2], v[3]}});
        } else if (cmd == "start") {
            const auto v = numbers(3);
            map.start_poses.push_back({v[0], v[1], v[2]});
        } else if (cmd == "goal") {
            const auto v = numbers(2);
            map.goal_points.push_back({v[0], v[1]});
        } else if (cmd == "name") {
            if (tok.size() != 2)
                throw ParseError(lineno, "'name' expects one token");
            map.name = std::string(tok[1]);
        } else {
            throw ParseError(lineno, "unknown directive '" + std::string(cmd) + "'");
        }
        if (end == text.size())
            break;
    }
    if (!have_size)
        throw ParseError(lineno, "missing 'size' directive");
    ensure_boundary(map);
    validate_map(map, spec);
    return map;
}

std::string serialize_scenario(const WorldMap& map)
{
    using textio::format_double;
    std::ostringstream os;
    os << "name " << map.name << "\n";
    os << "size " << format_double(map.width) << " " << format_double(map.height) << "\n";
    for (const Segment& s : map.segments)
        os << "segment " << format_double(s.a.x) << " " << format_double(s.a.y) << " " << format_double(s.b.x)
           << " " << format_double(s.b.y) << "\n";
    for (const Pose& p : map.start_poses)
        os << "start " << format_double(p.x) << " " << format_double(p.y) << " " << format_double(p.theta)
           << "\n";
    for (Vec2 g : map.goal_points)
        os << "goal " << format_double(g.x) << " " << format_double(g.y) << "\n";
    return os.str();
}

WorldMap load_scenario_file(const std::filesystem::path& path, const RobotSpec& spec)
{
    try {
        return load_scenario(textio::read_file(path), spec);
    } catch (const ParseError& e) {
        throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void save_scenario_file(const WorldMap& map, const std::filesystem::path& path)
{
    textio::write_file(path, serialize_scenario(map));
}

double training_map_size(int row, int col)
{
    return 20.0 - 1.5 * static_cast<double>(row + col);
}

namespace {

void add_box(std::vector<Segment>& out, Vec2 c, double hx, double hy, double angle)
{
    const double cs = std::cos(angle);
    const double sn = std::sin(angle);
    const Vec2 local[4] = {{hx, hy}, {-hx, hy}, {-hx, -hy}, {hx, -hy}};
    Vec2 w[4];
    for (int i = 0; i < 4; ++i)
        w[i] = {c.x + cs * local[i].x - sn * local[i].y, c.y + sn * local[i].x + cs * local[i].y};
    for (int i = 0; i < 4; ++i)
        out.push_back({w[i], w[(i + 1) % 4]});
}

WorldMap furnish(int row, int col)
{
    const double s = training_map_size(row, col);
    Rng rng(derive_seed(kGridSeed, static_cast<std::uint64_t>(row * kGridSize + col)));
    WorldMap map;
    map.name = "env_" + std::to_string(row) + "_" + std::to_string(col);
    map.width = s;
    map.height = s;
    map.segments = boundary_segments(s, s);

    const double margin = 0.3;
    auto in_bounds = [&](Vec2 p) { return p.x >= margin && p.x <= s - margin && p.y >= margin && p.y <= s - margin; };

    // Smaller maps get more clutter.
    const int obstacles = 3 + (row + col) / 2;
    int placed = 0;
    for (int attempt = 0; placed < obstacles && attempt < 1000; ++attempt) {
        const Vec2 c{rng.uniform(1.0, s - 1.0), rng.uniform(1.0, s - 1.0)};
        const double angle = rng.uniform(0.0, std::numbers::pi);
        std::vector<Segment> candidate;
        if (rng.uniform() < 0.5) {
            const double half = rng.uniform(0.75, 2.0);
            const Vec2 d{half * std::cos(angle), half * std::sin(angle)};
            candidate.push_back({c - d, c + d});
        } else {
            add_box(candidate, c, rng.uniform(0.3, 0.75), rng.uniform(0.3, 0.75), angle);
        }
        const bool ok = std::all_of(candidate.begin(), candidate.end(),
                                    [&](const Segment& seg) { return in_bounds(seg.a) && in_bounds(seg.b); });
        if (!ok)
            continue;
        map.segments.insert(map.segments.end(), candidate.begin(), candidate.end());
        ++placed;
    }

    RobotSpec inflated;
    inflated.length += 0.3;
    inflated.width += 0.3;
    constexpr int kAnnotations = 12;
    for (int attempt = 0; map.start_poses.size() < kAnnotations && attempt < 20000; ++attempt) {
        const Pose p{rng.uniform(0.6, s - 0.6), rng.uniform(0.6, s - 0.6),
                     wrap_angle(rng.uniform(-std::numbers::pi, std::numbers::pi))};
        if (!footprint_collides(p, map.segments, inflated))
            map.start_poses.push_back(p);
    }
    for (int attempt = 0; map.goal_points.size() < kAnnotations && attempt < 20000; ++attempt) {
        const Vec2 g{rng.uniform(0.6, s - 0.6), rng.uniform(0.6, s - 0.6)};
        const bool clear = std::all_of(map.segments.begin(), map.segments.end(),
                                       [&](const Segment& seg) { return point_segment_distance(g, seg) >= 0.6; });
        if (clear)
            map.goal_points.push_back(g);
    }
    return map;
}

} // namespace

std::vector<WorldMap> generate_training_grid()
{
    std::vector<WorldMap> grid;
    grid.reserve(kGridSize * kGridSize);
    for (int r = 0; r < kGridSize; ++r) {
        for (int c = 0; c < kGridSize; ++c) {
            grid.push_back(furnish(r, c));
            validate_map(grid.back());
        }
    }
    return grid;
}

} // namespace maernav
