// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero if any selected
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "maernav/curriculum.hpp"
#include "maernav/error.hpp"
#include "maernav/eval.hpp"
#include "maernav/learner.hpp"
#include "maernav/replay.hpp"
#include "maernav/sim.hpp"
#include "maernav/textio.hpp"
#include "maernav/trainer.hpp"
#include "support.hpp"

using namespace maernav;
namespace fs = std::filesystem;
using std::numbers::pi;

#ifndef MAERNAV_FIXTURES
#define MAERNAV_FIXTURES "tests/fixtures"
#endif

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("maernav_accept_" + name);
    fs::remove_all(p);
    return p;
}

// 1. Reverse integration recovers the start pose.
Verdict time_reversal()
{
    const auto t0 = Clock::now();
    Rng rng(101);
    double worst_pos = 0, worst_ang = 0;
    for (int i = 0; i < 100000; ++i) {
        const Pose p{rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-pi, pi)};
        const Action a{rng.uniform(-0.5, 0.5), rng.uniform(-pi / 2, pi / 2)};
        const double dt = rng.uniform(0.01, 1.0);
        const Pose q = integrate_unicycle(integrate_unicycle(p, a, dt), negate_action(a), dt);
        worst_pos = std::max({worst_pos, std::abs(q.x - p.x), std::abs(q.y - p.y)});
        worst_ang = std::max(worst_ang, std::abs(wrap_angle(q.theta - p.theta)));
    }
    const double secs = seconds_since(t0);
    return {worst_pos < 1e-9 && worst_ang < 1e-9 && secs < 5.0,
            fmt("1e5 cases, max position error %.3g m, max angle error %.3g rad, %.2f s", worst_pos, worst_ang, secs)};
}

// 2. Every beam agrees with an independent ray march.
Verdict raycast_oracle()
{
    const auto t0 = Clock::now();
    const RobotSpec spec;
    Rng rng(202);
    double worst = 0;
    int poses = 0;
    for (int m = 0; m < 10; ++m) {
        const double size = rng.uniform(5.0, 12.0);
        const auto segs = testsupport::random_segments(rng, size, 4 + m);
        for (int i = 0; i < 100; ++i) {
            Pose p;
            do {
                p = {rng.uniform(0.4, size - 0.4), rng.uniform(0.4, size - 0.4), rng.uniform(-pi, pi)};
            } while (footprint_collides(p, segs, spec));
            const auto scan = cast_lidar(p, segs, spec);
            for (int k = 0; k < spec.lidar_beams; ++k) {
                const double ang = p.theta + spec.lidar_fov * k / spec.lidar_beams;
                const double ref = testsupport::march_range({p.x, p.y}, ang, segs, spec.lidar_max_range, 0.5e-3);
                worst = std::max(worst, std::abs(scan[static_cast<std::size_t>(k)] - ref));
            }
            ++poses;
        }
    }
    const double secs = seconds_since(t0);
    return {worst <= 2e-3 && secs < 120.0,
            fmt("%d poses on 10 maps, %d beams each, max deviation %.3g m, %.1f s", poses, spec.lidar_beams, worst,
                secs)};
}

Observation obs_with(std::vector<double> lidar, double d, double phi, double v, double w)
{
    Observation o;
    o.lidar = std::move(lidar);
    o.goal_d = d;
    o.goal_phi = phi;
    o.v = v;
    o.w = w;
    return o;
}

// 3. Hand-derived mirror fixtures and the telescoping identity.
Verdict mirror_fixtures()
{
    std::vector<std::string> bad;
    const RewardConfig cfg;

    {
        const std::vector<double> L0{1, 2, 3}, L1{4, 5, 6};
        const std::vector<PoseTransition> ep{
            {obs_with(L0, 0.6, 0, 0, 0), {0.5, 0}, 10.0, obs_with(L1, 0.1, 0, 0.5, 0), true, {0, 0, 0}, {0.5, 0, 0}}};
        const auto m = mirror_episode(ep, {0, 0, 0});
        const bool ok = m.size() == 1 && m[0].obs.goal_d == 0.5 && m[0].obs.goal_phi == pi &&
                        m[0].action == Action{-0.5, 0} && m[0].reward == 10.0 && m[0].done &&
                        m[0].next_obs.goal_d == 0.0 && m[0].obs.lidar == L1 && m[0].next_obs.lidar == L0;
        if (!ok)
            bad.push_back("one-step fixture");
    }
    {
        const std::vector<double> L0{1, 1}, L1{2, 2}, L2{3, 3};
        const std::vector<PoseTransition> ep{
            {obs_with(L0, 1.0, 0, 0, 0), {0.5, 0}, 1.0, obs_with(L1, 0.5, 0, 0.5, 0), false, {0, 0, 0}, {0.5, 0, 0}},
            {obs_with(L1, 0.5, 0, 0.5, 0), {0.5, 0}, 10.0, obs_with(L2, 0.0, 0, 0.5, 0), true, {0.5, 0, 0}, {1, 0, 0}},
        };
        const auto m = mirror_episode(ep, {0, 0, 0});
        const bool ok = m.size() == 2 && m[0].reward == 1.0 && !m[0].done && m[1].reward == 10.0 && m[1].done &&
                        m[0].action == Action{-0.5, 0} && m[1].action == Action{-0.5, 0} && m[0].obs.goal_d == 1.0 &&
                        m[1].obs.goal_d == 0.5 && m[1].next_obs.goal_d == 0.0;
        if (!ok)
            bad.push_back("two-step fixture");
    }

    const RobotSpec spec;
    double worst_sum = 0, worst_pose = 0;
    int episodes = 0, multi_done = 0;
    for (const auto& [ep, start] : testsupport::harvest_successes(100, 303)) {
        const auto m = mirror_episode(ep, start, cfg);
        ++episodes;
        // Records that reach the mirrored goal form a suffix ending in the last record.
        std::size_t first_done = m.size();
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m[i].done) {
                first_done = i;
                break;
            }
        bool suffix = first_done < m.size();
        for (std::size_t i = first_done; i < m.size(); ++i)
            suffix = suffix && m[i].done && m[i].reward == cfg.success_reward &&
                     m[i].next_obs.goal_d < cfg.epsilon_goal;
        if (!suffix)
            bad.push_back("done suffix");
        multi_done += m.size() - first_done > 1;

        // Progress rewards telescope to c1 times the distance closed before reaching the goal.
        double sum = 0;
        for (std::size_t i = 0; i < first_done; ++i) {
            sum += m[i].reward;
            if (i + 1 < m.size() && m[i].next_obs.goal_d != m[i + 1].obs.goal_d)
                bad.push_back("chain");
        }
        const double closed = m[0].obs.goal_d - m[first_done].obs.goal_d;
        worst_sum = std::max(worst_sum, std::abs(sum - cfg.c1 * closed));

        Pose p = ep.back().next_pose;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i].action != negate_action(ep[ep.size() - 1 - i].action))
                bad.push_back("action");
            p = integrate_unicycle(p, m[i].action, spec.dt);
            const Pose& want = ep[ep.size() - 1 - i].pose;
            worst_pose = std::max({worst_pose, std::abs(p.x - want.x), std::abs(p.y - want.y),
                                   std::abs(wrap_angle(p.theta - want.theta))});
        }
    }
    const bool pass = bad.empty() && worst_sum < 1e-9 && worst_pose < 1e-9 && episodes == 100;
    return {pass, fmt("fixtures %s; %d episodes, telescoping error %.3g, retrace error %.3g, %d with a multi-record "
                      "goal suffix",
                      bad.empty() ? "exact" : bad.front().c_str(), episodes, worst_sum, worst_pose, multi_done)};
}

// 4. Reward and score tables, compared bit for bit.
Verdict reward_tables()
{
    const RewardConfig cfg;
    int fails = 0, total = 0;
    auto same = [&](double got, double want) {
        ++total;
        fails += std::memcmp(&got, &want, sizeof got) != 0;
    };
    same(compute_reward(2.0, 1.9, Outcome::Success, cfg), 10.0);
    same(compute_reward(2.0, 1.9, Outcome::Crash, cfg), -10.0);
    // The decimal 0.2 is not representable; the table value is the IEEE product 2 * (2.0 - 1.9).
    same(compute_reward(2.0, 1.9, Outcome::Running, cfg), 2.0 * (2.0 - 1.9));
    same(compute_reward(1.0, 0.5, Outcome::Running, cfg), 1.0);
    same(compute_reward(0.5, 1.0, Outcome::Timeout, cfg), -1.0);

    const auto m1 = mirror_reward(0.5, 0.1, cfg);
    same(m1.reward, 10.0);
    fails += !m1.done;
    const auto m2 = mirror_reward(1.0, 0.5, cfg);
    same(m2.reward, 1.0);
    fails += m2.done;
    same(negate_action({0.5, 0}).v, -0.5);

    same(nav_score(100, 400, true), 0.5);
    same(nav_score(0, 400, true), 1.0);
    for (int t : {0, 1, 137, 399, 400})
        same(nav_score(t, 400, false), -1.0);

    // A robot 0.15 m from the goal finishes with +10 on its next safe step.
    const auto room = testsupport::empty_room(8.0);
    Environment env(room);
    env.reset({{4, 4, 0}, {4.15, 4}, 400});
    const StepResult s = env.step({0.0, 0.3});
    same(s.reward, 10.0);
    fails += s.outcome != Outcome::Success;
    return {fails == 0, fmt("%d table entries, %d mismatches", total, fails)};
}

// 5. Analytic gradients and the squashed mixture density.
Verdict gradients()
{
    const auto t0 = Clock::now();
    SacConfig cfg;
    cfg.hidden_width = 64;
    cfg.hidden_layers = 2;
    double worst = 0;
    int zero_beta = 0, redrawn = 0;
    Rng data(505);
    // Central differences straddling a Leaky ReLU kink or a log-std clamp edge compare against a
    // one-sided slope, so points with any such input within this margin are redrawn.
    const double margin = 1e-3;
    auto near_kink = [&](const nn::Mlp::Cache& cache) {
        for (const auto& pre : cache.pre)
            if (pre.cwiseAbs().minCoeff() < margin)
                return true;
        return false;
    };
    std::uint64_t draw = 0;
    for (int point = 0; point < 100; ++point) {
        Rng init(derive_seed(500, draw++));
        ActorNet actor(36, cfg, init);
        CriticNet critic(36, cfg, init);
        actor.beta = data.uniform(0.3, 2.0);
        critic.beta = data.uniform(0.3, 2.0);
        nn::Matrix obs(40, 2), act(2, 2);
        for (int b = 0; b < 2; ++b) {
            for (int i = 0; i < 36; ++i)
                obs(i, b) = data.uniform(0.2, 30.0);
            obs(36, b) = data.uniform(0.0, 10.0);
            obs(37, b) = data.uniform(-pi, pi);
            obs(38, b) = data.uniform(-0.5, 0.5);
            obs(39, b) = data.uniform(-1.5, 1.5);
            act(0, b) = data.uniform(-0.5, 0.5);
            act(1, b) = data.uniform(-1.5, 1.5);
        }
        nn::Mlp::Cache ac, cc;
        const nn::Matrix head = actor.head(obs, &ac);
        critic.forward(obs, act, &cc);
        const int k = actor.components();
        const auto raw_log_std = head.bottomRows(2 * k);
        const bool clamp_edge = (raw_log_std.array() - kLogStdMax).abs().minCoeff() < margin ||
                                (raw_log_std.array() - kLogStdMin).abs().minCoeff() < margin;
        if (near_kink(ac) || near_kink(cc) || clamp_edge) {
            ++redrawn;
            --point;
            continue;
        }
        const auto rep = gradient_check(actor, critic, obs, act, derive_seed(501, draw));
        worst = std::max(worst, rep.max_rel_error());
        zero_beta += rep.beta_actor_grad == 0.0 || rep.beta_critic_grad == 0.0;
    }

    // Density of a few mixtures integrated over the action box by the midpoint rule.
    const RobotSpec spec;
    double worst_mass = 0;
    Rng mix_rng(506);
    for (int trial = 0; trial < 5; ++trial) {
        Mixture m;
        for (int k = 0; k < 3; ++k) {
            m.weights.push_back(mix_rng.uniform(0.2, 1.0));
            m.means.push_back({mix_rng.uniform(-0.6, 0.6), mix_rng.uniform(-0.6, 0.6)});
            m.stds.push_back({mix_rng.uniform(0.3, 0.8), mix_rng.uniform(0.3, 0.8)});
        }
        double wsum = 0;
        for (double w : m.weights)
            wsum += w;
        for (double& w : m.weights)
            w /= wsum;
        const int n = 200;
        const double hv = 2 * spec.v_max / n, hw = 2 * spec.w_max / n;
        double mass = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                mass += std::exp(mixture_log_prob(m, {-spec.v_max + (i + 0.5) * hv, -spec.w_max + (j + 0.5) * hw})) *
                        hv * hw;
        worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
    }
    return {worst < 1e-4 && zero_beta == 0 && worst_mass < 0.02,
            fmt("100 points on a 2x64 network (%d redrawn near a kink), max relative error %.3g, beta gradients "
                "nonzero: %s; density mass error %.3g on a 200x200 grid, %.1f s",
                redrawn, worst, zero_beta ? "no" : "yes", worst_mass, seconds_since(t0))};
}

// 6. Curriculum unlock timeline and sampling frequencies.
Verdict curriculum()
{
    Curriculum c;
    std::vector<std::pair<int, std::vector<EnvId>>> events;
    int t = 0;
    auto feed = [&](EnvId e, int fails, int wins) {
        for (int i = 0; i < fails + wins; ++i) {
            ++t;
            auto u = c.record_outcome(e, i >= fails);
            if (!u.empty())
                events.push_back({t, u});
        }
    };
    feed({0, 0}, 6, 14);  // mean exactly 0.7: locked
    feed({0, 0}, 0, 1);   // the oldest failure drops out, 0.75
    feed({0, 1}, 0, 20);  // (1,0) still has an empty window
    feed({1, 0}, 6, 14);  // 0.7 on (1,0)
    feed({1, 0}, 0, 1);
    feed({0, 2}, 0, 20);
    feed({1, 1}, 0, 20);
    feed({2, 0}, 0, 20);
    const std::vector<std::pair<int, std::vector<EnvId>>> want{
        {21, {{0, 1}, {1, 0}}},
        {62, {{0, 2}, {1, 1}, {2, 0}}},
        {122, {{0, 3}, {1, 2}, {2, 1}, {3, 0}}},
    };
    bool timeline = events == want;
    // Perfect play from here adds one anti-diagonal per pass.
    std::vector<std::size_t> sizes;
    for (int wave = 0; wave < 6; ++wave) {
        for (EnvId e : c.unlocked_envs())
            feed(e, 0, 20);
        sizes.push_back(c.unlocked_envs().size());
    }
    timeline = timeline && sizes == std::vector<std::size_t>{15, 19, 22, 24, 25, 25};

    // Sampling over a mixed state: six envs with distinct means, (0,0) perfect.
    Curriculum s;
    for (EnvId e : s.unlocked_envs())
        for (int i = 0; i < 20; ++i)
            s.record_outcome(e, true);
    // (0,1) and (1,0) come first: their results unlock the next diagonal.
    const std::vector<std::pair<EnvId, int>> wins{{{0, 1}, 15}, {{1, 0}, 16}, {{0, 2}, 0}, {{1, 1}, 18}, {{2, 0}, 10}};
    for (const auto& [e, w] : wins)
        for (int i = 0; i < 20; ++i)
            s.record_outcome(e, i < w);
    const auto envs = s.unlocked_envs();
    const auto p = s.probabilities();
    double norm = 0;
    for (EnvId e : envs)
        norm += 1.0 - s.mean_success(e);
    const int draws = 100000;
    std::map<EnvId, int> counts;
    Rng rng(606);
    for (int i = 0; i < draws; ++i)
        ++counts[s.sample_env(rng)];
    double worst_z = 0;
    bool probs_ok = true;
    for (std::size_t i = 0; i < envs.size(); ++i) {
        const double want_p = (1.0 - s.mean_success(envs[i])) / norm;
        probs_ok = probs_ok && std::abs(p[i] - want_p) < 1e-12;
        const double mean = draws * want_p, sd = std::sqrt(draws * want_p * (1 - want_p));
        const int got = counts[envs[i]];
        if (sd == 0.0) {
            probs_ok = probs_ok && got == static_cast<int>(mean);
            continue;
        }
        worst_z = std::max(worst_z, std::abs(got - mean) / sd);
    }
    return {timeline && probs_ok && worst_z < 5.0,
            fmt("unlock timeline %s; %zu envs sampled 1e5 times, max |z| %.2f", timeline ? "exact" : "differs",
                envs.size(), worst_z)};
}

// --- Training fixtures ---

TrainRunConfig small_net(TrainRunConfig c)
{
    c.sac.hidden_width = 64;
    c.sac.hidden_layers = 2;
    c.sac.batch_size = 64;
    c.eval_tasks = 0;
    return c;
}

struct SmokeRun {
    bool reached = false;
    long long steps = 0;
    long long episodes = 0;
    double best = 0;
    double secs = 0;
};

// 7. Learns to reach nearby goals in an empty room.
Verdict smoke_training(const std::vector<std::uint64_t>& seeds)
{
    std::string detail;
    int passed = 0;
    for (std::uint64_t seed : seeds) {
        TrainRunConfig c = small_net({});
        c.seed = seed;
        c.total_steps = 150000;
        c.warmup_steps = 2000;
        c.min_task_distance = 0.5;
        c.max_task_distance = 3.0;
        c.random_start_heading = true;
        c.sac.lr_actor = c.sac.lr_critic = c.sac.lr_alpha = 1e-3;
        const auto t0 = Clock::now();
        Trainer t(c, {testsupport::annotated_room(6.0, 0.5)});
        SmokeRun r;
        while (t.total_steps() < c.total_steps) {
            const EpisodeRecord e = t.run_episode();
            r.best = std::max(r.best, e.episode >= 100 ? e.recent_success : 0.0);
            if (e.episode >= 100 && e.recent_success >= 0.8) {
                r.reached = true;
                break;
            }
        }
        r.steps = t.total_steps();
        r.episodes = t.episodes();
        r.secs = seconds_since(t0);
        passed += r.reached && r.secs <= 1800.0;
        detail += fmt("%sseed %llu: %s at %lld steps (%lld episodes, best trailing-100 %.2f, %.0f s)",
                      detail.empty() ? "" : "; ", static_cast<unsigned long long>(seed),
                      r.reached ? "reached 80%" : "not reached", r.steps, r.episodes, r.best, r.secs);
        std::fflush(stdout);
    }
    const int need = std::min<int>(2, static_cast<int>(seeds.size()));
    return {passed >= need, detail};
}

// Training yards for the backing-out test: copies of the garage geometry rotated and shifted along
// the wall. Docking tasks start in the open facing the slot, with goals in front of the mouth, at it,
// or inside the slot; exit tasks start deep in the slot facing out. Every task faces its goal, so the
// raw experience only ever drives forward.
std::vector<WorldMap> docking_yards(const RobotSpec& spec)
{
    std::vector<WorldMap> out;
    const double lane = 0.4, mouth = 6.5;
    for (double depth : {mouth - 0.5, mouth - 0.1, mouth + 0.3, mouth + 0.7}) {
        for (double cx : {2.5, 4.0, 5.5}) {
            for (int rot = 0; rot < 4; ++rot) {
                auto tf = [&](Vec2 p) {
                    Vec2 q{p.x - 4, p.y - 4};
                    for (int k = 0; k < rot; ++k)
                        q = {-q.y, q.x};
                    return Vec2{q.x + 4, q.y + 4};
                };
                WorldMap m;
                m.name = fmt("yard_%g_%d_%g", cx, rot, depth);
                m.width = m.height = 8.0;
                const std::vector<Segment> local{{{0, mouth}, {cx - lane, mouth}},
                                                 {{cx + lane, mouth}, {8, mouth}},
                                                 {{cx - lane, mouth}, {cx - lane, 8}},
                                                 {{cx + lane, mouth}, {cx + lane, 8}}};
                for (const Segment& s : local)
                    m.segments.push_back({tf(s.a), tf(s.b)});
                ensure_boundary(m);
                const double heading = wrap_angle(pi / 2 + rot * pi / 2);
                WorldMap exit = m;
                m.goal_points.push_back(tf({cx, depth}));
                for (double back : {0.8, 1.2, 1.6, 2.0, 2.4, 2.8})
                    for (double side : {-0.08, 0.0, 0.08})
                        for (double dh : {-0.08, 0.0, 0.08}) {
                            const Vec2 p = tf({cx + side, depth - back});
                            const Pose start{p.x, p.y, wrap_angle(heading + dh)};
                            if (!footprint_collides(start, m.segments, spec))
                                m.start_poses.push_back(start);
                        }
                validate_map(m, spec);
                out.push_back(std::move(m));
                if (depth != mouth + 0.7)
                    continue;
                exit.name = fmt("exit_%g_%d", cx, rot);
                exit.goal_points.push_back(tf({cx, 4.7}));
                for (double y : {6.8, 7.0, 7.2})
                    for (double side : {-0.04, 0.0, 0.04})
                        for (double dh : {-0.04, 0.0, 0.04}) {
                            const Vec2 p = tf({cx + side, y});
                            const Pose start{p.x, p.y, wrap_angle(heading + pi + dh)};
                            if (!footprint_collides(start, exit.segments, spec))
                                exit.start_poses.push_back(start);
                        }
                validate_map(exit, spec);
                out.push_back(std::move(exit));
            }
        }
    }
    return out;
}

struct GarageRun {
    int successes = 0;
    long long train_steps = 0;
    double train_success = 0;
    std::string outcomes;
};

GarageRun garage_run(std::uint64_t seed, bool mirror, long long budget)
{
    TrainRunConfig c = small_net({});
    c.seed = seed;
    c.total_steps = budget;
    c.warmup_steps = 2000;
    c.mirror_enabled = mirror;
    c.curriculum_enabled = false;
    c.min_task_distance = 1.0;
    c.max_task_distance = 4.0;
    c.max_episode_steps = 200;
    c.sac.lr_actor = c.sac.lr_critic = c.sac.lr_alpha = 1e-3;
    Trainer t(c, docking_yards(c.robot));
    EpisodeRecord last;
    while (t.total_steps() < c.total_steps)
        last = t.run_episode();

    GarageRun r;
    r.train_steps = t.total_steps();
    r.train_success = last.recent_success;
    const auto garage = build_challenge_scenarios(c.robot)[2];
    const TaskSpec base = garage.tasks.at(0);
    Rng jitter(derive_seed(seed, 808));
    std::vector<TaskSpec> tasks;
    for (int i = 0; i < 10; ++i) {
        TaskSpec task = base;
        task.start.x += jitter.uniform(-0.02, 0.02);
        task.start.theta = wrap_angle(task.start.theta + jitter.uniform(-0.02, 0.02));
        tasks.push_back(task);
    }
    const auto results = run_task_suite(ActorPolicy(t.agent_snapshot()), garage.map, tasks, {seed, 1, false}, c.robot,
                                        c.reward);
    for (const auto& res : results) {
        r.successes += res.outcome == Outcome::Success;
        r.outcomes += outcome_name(res.outcome).front();
    }
    return r;
}

// 8. Mirror augmentation alone gives the backing-out skill.
Verdict backward_differential(const std::vector<std::uint64_t>& seeds, long long budget)
{
    std::string detail;
    int maer_ok = 0, raw_bad = 0;
    for (std::uint64_t seed : seeds) {
        const auto t0 = Clock::now();
        const GarageRun m = garage_run(seed, true, budget);
        const GarageRun r = garage_run(seed, false, budget);
        maer_ok += m.successes >= 7;
        raw_bad += r.successes > 3;
        detail += fmt("%sseed %llu: MAER %d/10 [%s] (train sr %.2f), Raw %d/10 [%s] (train sr %.2f), %.0f s",
                      detail.empty() ? "" : "; ", static_cast<unsigned long long>(seed), m.successes,
                      m.outcomes.c_str(), m.train_success, r.successes, r.outcomes.c_str(), r.train_success,
                      seconds_since(t0));
    }
    const int need = std::min<int>(2, static_cast<int>(seeds.size()));
    return {maer_ok >= need && raw_bad == 0, detail};
}

// 9. Determinism and split-run resume.
Verdict determinism()
{
    TrainRunConfig c = small_net({});
    c.total_steps = 1000;
    c.warmup_steps = 300;
    c.max_episode_steps = 100;
    c.eval_every = 5;
    c.eval_tasks = 3;
    c.checkpoint_every = 4;
    c.min_task_distance = 0.5;
    c.max_task_distance = 3.0;
    c.seed = 909;
    const std::vector<WorldMap> maps{testsupport::annotated_room(6.0, 1.0), testsupport::annotated_room(7.0, 1.0)};

    auto run_to = [&](const fs::path& dir) {
        TrainRunConfig cc = c;
        cc.out_dir = dir.string();
        Trainer t(cc, maps);
        t.run();
    };
    const fs::path a = scratch("det_a"), b = scratch("det_b"), s = scratch("det_split");
    run_to(a);
    run_to(b);
    const std::string log_a = textio::read_file(a / "train_log.txt");
    const bool same_logs = log_a == textio::read_file(b / "train_log.txt") &&
                           textio::read_file(a / "eval_log.txt") == textio::read_file(b / "eval_log.txt") &&
                           textio::read_file(a / "checkpoint.bin") == textio::read_file(b / "checkpoint.bin");

    TrainRunConfig half = c;
    half.total_steps = 500;
    half.out_dir = s.string();
    {
        Trainer t(half, maps);
        t.run();
    }
    Trainer resumed = Trainer::resume(s / "checkpoint.bin", 1000);
    resumed.run();
    const bool split_same = textio::read_file(s / "train_log.txt") == log_a &&
                            textio::read_file(s / "eval_log.txt") == textio::read_file(a / "eval_log.txt") &&
                            textio::read_file(s / "checkpoint.bin") == textio::read_file(a / "checkpoint.bin");
    const std::size_t rows = parse_training_returns(log_a).size();
    for (const auto& d : {a, b, s})
        fs::remove_all(d);
    return {same_logs && split_same && log_a.size() > 0,
            fmt("repeat run %s, split at 500 + resume to 1000 steps %s (%zu episodes)",
                same_logs ? "byte-identical" : "differs", split_same ? "byte-identical" : "differs", rows)};
}

// 10. Metrics against a brute-force recomputation on canned result logs.
Verdict metrics_oracle()
{
    std::vector<std::vector<TaskResult>> methods;
    for (const char* name : {"maer", "raw", "sac"})
        methods.push_back(parse_results(textio::read_file(std::string(MAERNAV_FIXTURES) + "/results_" + name + ".txt")));
    const auto got = compute_metrics(methods);
    const auto want = testsupport::brute_metrics(methods);
    int mismatches = 0;
    for (std::size_t i = 0; i < methods.size(); ++i) {
        mismatches += got[i].sr != want[i].sr;
        mismatches += got[i].cr != want[i].cr;
        mismatches += got[i].tr != want[i].tr;
        mismatches += got[i].aes_star != want[i].aes;
        mismatches += got[i].mans_mean != want[i].mans_mean;
        mismatches += got[i].mans_std != want[i].mans_std;
        mismatches += got[i].common_successes != want[i].common;
    }
    // Dropping a method can only widen the common-success set.
    const auto two = compute_metrics({methods[0], methods[1]});
    const auto two_want = testsupport::brute_metrics({methods[0], methods[1]});
    mismatches += two[0].aes_star != two_want[0].aes;
    mismatches += two[0].common_successes < got[0].common_successes;
    return {mismatches == 0, fmt("3 methods x %zu tasks, %d common successes, AES* %.6g / %.6g / %.6g, %d mismatches",
                                 methods[0].size(), got[0].common_successes, got[0].aes_star, got[1].aes_star,
                                 got[2].aes_star, mismatches)};
}

std::vector<std::uint64_t> parse_seeds(const std::string& s)
{
    std::vector<std::uint64_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(std::stoull(item));
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"maer-nav acceptance suite"};
    std::vector<int> only;
    std::string seeds_text = "1,2,3";
    long long garage_budget = 400000;
    app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',');
    app.add_option("--seeds", seeds_text, "Comma-separated seeds for the training criteria");
    app.add_option("--garage-steps", garage_budget, "Training steps per run for the backing-out criterion");
    CLI11_PARSE(app, argc, argv);
    const auto seeds = parse_seeds(seeds_text);

    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"kinematic time reversal", time_reversal},
        {"raycast oracle", raycast_oracle},
        {"mirror fixtures and telescoping", mirror_fixtures},
        {"reward and score tables", reward_tables},
        {"gradient correctness", gradients},
        {"curriculum timeline and sampling", curriculum},
        {"smoke training", [&] { return smoke_training(seeds); }},
        {"backward-capability differential", [&] { return backward_differential(seeds, garage_budget); }},
        {"determinism and resume", determinism},
        {"metrics oracle", metrics_oracle},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end())
            continue;
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += !v.pass;
        std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), v.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
