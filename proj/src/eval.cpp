#include "maernav/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <thread>

#include "maernav/error.hpp"
#include "maernav/textio.hpp"

namespace maernav {

double nav_score(int steps, int max_steps, bool success)
{
    if (!success)
        return -1.0;
    return 1.0 - 2.0 * static_cast<double>(steps) / static_cast<double>(max_steps);
}

Action GoalSeekPolicy::act(const Observation& obs, const Pose&, const TaskSpec&, Rng&) const
{
    double err = obs.goal_phi;
    if (reverse_)
        err = wrap_angle(err - std::numbers::pi);
    const double w = std::clamp(2.0 * err, -spec_.w_max, spec_.w_max);
    if (std::abs(err) > 0.3)
        return {0.0, w};
    return {reverse_ ? -spec_.v_max : spec_.v_max, w};
}

namespace {

TaskResult run_one(const Policy& policy, const std::shared_ptr<const WorldMap>& map, const TaskSpec& task,
                   int id, std::uint64_t seed, bool keep, const RobotSpec& spec, const RewardConfig& reward)
{
    Environment env(map, spec, reward);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(id)));
    Observation obs = env.reset(task);
    TaskResult r;
    r.task_id = id;
    r.max_steps = task.max_steps;
    if (keep) {
        r.trajectory = std::string(kTrajectoryHeader);
        r.trajectory += format_trajectory_record(0, env.pose(), {0.0, 0.0}, 0.0, Outcome::Running);
    }
    while (!env.done()) {
        const Action a = policy.act(obs, env.pose(), task, rng);
        StepResult s = env.step(a);
        if (keep)
            r.trajectory += format_trajectory_record(env.steps(), s.pose, s.action, s.reward, s.outcome);
        obs = std::move(s.obs);
    }
    r.outcome = env.outcome();
    r.steps = env.steps();
    r.score = nav_score(r.steps, r.max_steps, r.outcome == Outcome::Success);
    return r;
}

} // namespace

std::vector<TaskResult> run_task_suite(const Policy& policy, std::shared_ptr<const WorldMap> map,
                                       const std::vector<TaskSpec>& tasks, const SuiteOptions& opt,
                                       const RobotSpec& spec, const RewardConfig& reward)
{
    if (!map)
        throw DomainError("task suite needs a map");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        try {
            validate_task(*map, tasks[i], spec);
        } catch (const ValidationError& e) {
            throw ValidationError("task " + std::to_string(i) + ": " + e.what());
        }
    }

    std::vector<TaskResult> out(tasks.size());
    const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(tasks.size())));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i)
            out[i] = run_one(policy, map, tasks[i], static_cast<int>(i), opt.seed, opt.keep_trajectories, spec, reward);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) {
        pool.emplace_back([&, j] {
            try {
                for (std::size_t i = next++; i < tasks.size(); i = next++)
                    out[i] = run_one(policy, map, tasks[i], static_cast<int>(i), opt.seed, opt.keep_trajectories,
                                     spec, reward);
            } catch (...) {
                errors[static_cast<std::size_t>(j)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

std::vector<MetricsReport> compute_metrics(const std::vector<std::vector<TaskResult>>& methods)
{
    std::vector<std::map<int, const TaskResult*>> by_id(methods.size());
    for (std::size_t m = 0; m < methods.size(); ++m) {
        for (const TaskResult& r : methods[m])
            if (!by_id[m].emplace(r.task_id, &r).second)
                throw ValidationError("duplicate task id " + std::to_string(r.task_id));
        if (m > 0) {
            bool same = by_id[m].size() == by_id[0].size();
            for (auto a = by_id[m].begin(), b = by_id[0].begin(); same && a != by_id[m].end(); ++a, ++b)
                same = a->first == b->first;
            if (!same)
                throw ValidationError("methods ran different task lists");
        }
    }

    std::vector<int> common;
    if (!methods.empty()) {
        for (const auto& [id, r] : by_id[0]) {
            bool all = true;
            for (const auto& m : by_id)
                all = all && m.at(id)->outcome == Outcome::Success;
            if (all)
                common.push_back(id);
        }
    }

    std::vector<MetricsReport> out;
    for (const auto& m : by_id) {
        MetricsReport rep;
        rep.tasks = static_cast<int>(m.size());
        if (m.empty())
            throw ValidationError("method has no task results");
        int s = 0, c = 0, t = 0;
        double sum = 0.0;
        for (const auto& [id, r] : m) {
            s += r->outcome == Outcome::Success;
            c += r->outcome == Outcome::Crash;
            t += r->outcome == Outcome::Timeout;
            sum += r->score;
        }
        if (s + c + t != rep.tasks)
            throw ValidationError("task result without a terminal outcome");
        const double n = rep.tasks;
        rep.sr = s / n;
        rep.cr = c / n;
        rep.tr = t / n;
        rep.mans_mean = sum / n;
        double var = 0.0;
        for (const auto& [id, r] : m)
            var += (r->score - rep.mans_mean) * (r->score - rep.mans_mean);
        rep.mans_std = std::sqrt(var / n);
        rep.common_successes = static_cast<int>(common.size());
        if (common.empty()) {
            rep.aes_star = std::numeric_limits<double>::quiet_NaN();
        } else {
            double steps = 0.0;
            for (int id : common)
                steps += m.at(id)->steps;
            rep.aes_star = steps / static_cast<double>(common.size());
        }
        out.push_back(rep);
    }
    return out;
}

// --- Challenge fixtures ---

namespace {

constexpr double kLane = 0.8;

std::shared_ptr<const WorldMap> finish(WorldMap m, const std::vector<TaskSpec>& tasks, const RobotSpec& spec)
{
    ensure_boundary(m);
    for (const TaskSpec& t : tasks) {
        m.start_poses.push_back(t.start);
        m.goal_points.push_back(t.goal);
    }
    validate_map(m, spec);
    return std::make_shared<const WorldMap>(std::move(m));
}

} // namespace

std::vector<ChallengeScenario> build_challenge_scenarios(const RobotSpec& spec)
{
    using std::numbers::pi;
    std::vector<ChallengeScenario> out;
    const double lo = 4.0 - kLane / 2;
    const double hi = 4.0 + kLane / 2;

    {
        // Plus-shaped corridor, arms ending 0.5 m from the boundary.
        WorldMap m;
        m.name = "corridor";
        m.width = m.height = 8.0;
        const double a = 0.5, b = 7.5;
        m.segments = {
            {{lo, a}, {lo, lo}}, {{hi, a}, {hi, lo}},  // bottom arm
            {{lo, hi}, {lo, b}}, {{hi, hi}, {hi, b}},  // top arm
            {{a, lo}, {lo, lo}}, {{a, hi}, {lo, hi}},  // left arm
            {{hi, lo}, {b, lo}}, {{hi, hi}, {b, hi}},  // right arm
            {{lo, a}, {hi, a}}, {{lo, b}, {hi, b}}, {{a, lo}, {a, hi}}, {{b, lo}, {b, hi}},
        };
        const Pose start{4.0, 6.8, -pi / 2};
        std::vector<TaskSpec> tasks{{start, {1.0, 4.0}, 400}, {start, {4.0, 1.0}, 400}};
        out.push_back({"corridor", finish(m, tasks, spec), tasks});
    }
    {
        // Start with the left flank 5 cm from a long wall.
        WorldMap m;
        m.name = "wall";
        m.width = m.height = 8.0;
        const double wall_y = 4.0;
        m.segments = {
            {{1.0, wall_y}, {7.0, wall_y}},
            {{4.5, 0.0}, {4.5, 2.0}},
            {{1.0, 1.5}, {3.0, 1.5}},
            {{5.5, 5.5}, {7.0, 5.5}},
        };
        const Pose start{2.0, wall_y - 0.05 - spec.width / 2, 0.0};
        std::vector<TaskSpec> tasks{{start, {6.0, 3.0}, 400}, {start, {6.0, 1.0}, 400}};
        out.push_back({"wall", finish(m, tasks, spec), tasks});
    }
    {
        // Dead-end slot 0.8 m wide and 1.5 m deep against the top boundary.
        WorldMap m;
        m.name = "garage";
        m.width = m.height = 8.0;
        const double mouth = 6.5;
        m.segments = {
            {{lo, mouth}, {lo, 8.0}}, {{hi, mouth}, {hi, 8.0}},
            {{0.0, mouth}, {lo, mouth}}, {{hi, mouth}, {8.0, mouth}},
        };
        const Pose start{4.0, 7.0, pi / 2};
        std::vector<TaskSpec> tasks{{start, {4.0, mouth - 2.0}, 400}};
        out.push_back({"garage", finish(m, tasks, spec), tasks});
    }
    return out;
}

TaskSpec reversed_task(const TaskSpec& t)
{
    return {{t.goal.x, t.goal.y, t.start.theta}, {t.start.x, t.start.y}, t.max_steps};
}

// --- Files ---

std::string format_results(const std::vector<TaskResult>& results)
{
    std::string s = "# task outcome steps score\n";
    for (const TaskResult& r : results) {
        s += std::to_string(r.task_id) + ' ' + std::string(outcome_name(r.outcome)) + ' ' + std::to_string(r.steps) +
             ' ' + textio::format_double(r.score) + '\n';
    }
    return s;
}

namespace {

template <class F>
void for_each_line(const std::string& text, F&& f)
{
    std::size_t pos = 0;
    int lineno = 0;
    while (pos < text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        ++lineno;
        const std::string_view line = textio::strip_comment(std::string_view(text).substr(pos, end - pos));
        pos = end + 1;
        if (!line.empty())
            f(lineno, textio::split_ws(line));
    }
}

double need_double(std::string_view tok, int line)
{
    double v = 0.0;
    if (!textio::parse_double(tok, v))
        throw ParseError(line, "bad number '" + std::string(tok) + "'");
    return v;
}

long long need_int(std::string_view tok, int line)
{
    long long v = 0;
    if (!textio::parse_int(tok, v))
        throw ParseError(line, "bad integer '" + std::string(tok) + "'");
    return v;
}

} // namespace

std::vector<TaskResult> parse_results(const std::string& text)
{
    std::vector<TaskResult> out;
    for_each_line(text, [&](int line, const std::vector<std::string_view>& tok) {
        if (tok.size() != 4)
            throw ParseError(line, "expected: task outcome steps score");
        TaskResult r;
        r.task_id = static_cast<int>(need_int(tok[0], line));
        try {
            r.outcome = parse_outcome(tok[1]);
        } catch (const Error&) {
            throw ParseError(line, "unknown outcome '" + std::string(tok[1]) + "'");
        }
        r.steps = static_cast<int>(need_int(tok[2], line));
        r.score = need_double(tok[3], line);
        r.max_steps = 0;
        out.push_back(std::move(r));
    });
    return out;
}

std::string format_tasks(const std::vector<TaskSpec>& tasks)
{
    using textio::format_double;
    std::string s = "# x y theta goal_x goal_y max_steps\n";
    for (const TaskSpec& t : tasks) {
        s += format_double(t.start.x) + ' ' + format_double(t.start.y) + ' ' + format_double(t.start.theta) + ' ' +
             format_double(t.goal.x) + ' ' + format_double(t.goal.y) + ' ' + std::to_string(t.max_steps) + '\n';
    }
    return s;
}

std::vector<TaskSpec> parse_tasks(const std::string& text)
{
    std::vector<TaskSpec> out;
    for_each_line(text, [&](int line, const std::vector<std::string_view>& tok) {
        if (tok.size() != 5 && tok.size() != 6)
            throw ParseError(line, "expected: x y theta goal_x goal_y [max_steps]");
        TaskSpec t;
        t.start = {need_double(tok[0], line), need_double(tok[1], line), need_double(tok[2], line)};
        t.goal = {need_double(tok[3], line), need_double(tok[4], line)};
        if (tok.size() == 6)
            t.max_steps = static_cast<int>(need_int(tok[5], line));
        if (t.max_steps < 1)
            throw ParseError(line, "max_steps must be >= 1");
        out.push_back(t);
    });
    return out;
}

std::string format_metrics(const MetricsReport& m)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "tasks=%d SR=%.4f CR=%.4f TR=%.4f AES*=%.2f (n=%d) MANS=%.4f+-%.4f\n", m.tasks,
                  m.sr, m.cr, m.tr, m.aes_star, m.common_successes, m.mans_mean, m.mans_std);
    return buf;
}

std::vector<Pose> parse_trajectory(const std::string& text)
{
    std::vector<Pose> out;
    for_each_line(text, [&](int line, const std::vector<std::string_view>& tok) {
        if (tok.size() != 8)
            throw ParseError(line, "expected 8 trajectory fields");
        out.push_back({need_double(tok[1], line), need_double(tok[2], line), need_double(tok[3], line)});
    });
    return out;
}

// --- SVG ---

namespace {

constexpr double kPx = 60.0;
constexpr double kMargin = 20.0;

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

const char* outcome_color(Outcome o)
{
    switch (o) {
    case Outcome::Success: return "#2a9d3f";
    case Outcome::Crash: return "#d62828";
    default: return "#f08c00";
    }
}

} // namespace

std::string render_trajectories_svg(const WorldMap& map, const std::vector<PlotTrack>& tracks,
                                    const std::vector<TaskSpec>& tasks)
{
    const double w = map.width * kPx + 2 * kMargin;
    const double h = map.height * kPx + 2 * kMargin;
    auto sx = [&](double x) { return num(kMargin + x * kPx); };
    auto sy = [&](double y) { return num(kMargin + (map.height - y) * kPx); };

    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<title>" + map.name + "</title>\n";
    for (const Segment& seg : map.segments) {
        s += "<line x1=\"" + sx(seg.a.x) + "\" y1=\"" + sy(seg.a.y) + "\" x2=\"" + sx(seg.b.x) + "\" y2=\"" +
             sy(seg.b.y) + "\" stroke=\"black\" stroke-width=\"3\"/>\n";
    }
    for (const TaskSpec& t : tasks) {
        s += "<circle cx=\"" + sx(t.goal.x) + "\" cy=\"" + sy(t.goal.y) + "\" r=\"" + num(0.2 * kPx) +
             "\" fill=\"none\" stroke=\"#1d3557\" stroke-dasharray=\"4 3\"/>\n";
    }
    for (const PlotTrack& tr : tracks) {
        if (tr.poses.empty())
            continue;
        s += "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"";
        s += outcome_color(tr.outcome);
        s += "\" points=\"";
        for (const Pose& p : tr.poses)
            s += sx(p.x) + "," + sy(p.y) + " ";
        s += "\"/>\n";
        const Pose& p0 = tr.poses.front();
        s += "<circle cx=\"" + sx(p0.x) + "\" cy=\"" + sy(p0.y) + "\" r=\"4\" fill=\"#1d3557\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

std::string render_returns_svg(const std::vector<double>& returns, const std::string& title)
{
    const double w = 800, h = 400, pad = 40;
    double lo = 0.0, hi = 1.0;
    if (!returns.empty()) {
        const auto [mn, mx] = std::minmax_element(returns.begin(), returns.end());
        lo = *mn;
        hi = *mx > *mn ? *mx : *mn + 1.0;
    }
    const double n = std::max<double>(1.0, static_cast<double>(returns.size()) - 1.0);
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"400\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(pad) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" + title + "</text>\n";
    s += "<line x1=\"" + num(pad) + "\" y1=\"" + num(h - pad) + "\" x2=\"" + num(w - pad) + "\" y2=\"" + num(h - pad) +
         "\" stroke=\"gray\"/>\n";
    s += "<polyline fill=\"none\" stroke=\"#1d3557\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < returns.size(); ++i) {
        const double x = pad + (w - 2 * pad) * static_cast<double>(i) / n;
        const double y = h - pad - (h - 2 * pad) * (returns[i] - lo) / (hi - lo);
        s += num(x) + "," + num(y) + " ";
    }
    s += "\"/>\n</svg>\n";
    return s;
}

} // namespace maernav
