#include "maernav/maernav.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include "maernav/error.hpp"
#include "maernav/eval.hpp"
#include "maernav/replay.hpp"
#include "maernav/textio.hpp"
#include "maernav/trainer.hpp"

namespace fs = std::filesystem;
using namespace maernav;

struct mn_map {
    std::shared_ptr<const WorldMap> map;
};

struct mn_env {
    Environment env;
};

struct mn_trainer {
    Trainer trainer;
};

struct mn_policy {
    std::shared_ptr<const SacAgent> agent;
};

namespace {

thread_local std::string g_last_error;

mn_status fail(mn_status s, const std::string& msg)
{
    g_last_error = msg;
    return s;
}

template <class F>
mn_status guarded(F&& f)
{
    try {
        g_last_error.clear();
        f();
        return MN_OK;
    } catch (const Error& e) {
        return fail(static_cast<mn_status>(e.kind()), e.what());
    } catch (const fs::filesystem_error& e) {
        return fail(MN_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return fail(MN_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(MN_ERR_INTERNAL, e.what());
    }
}

void need(const void* p, const char* what)
{
    if (!p)
        throw Error(ErrorKind::Usage, std::string(what) + " must not be null");
}

char* dup(const std::string& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out)
        throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

mn_outcome to_c(Outcome o)
{
    switch (o) {
    case Outcome::Success: return MN_SUCCESS;
    case Outcome::Crash: return MN_CRASH;
    case Outcome::Timeout: return MN_TIMEOUT;
    default: return MN_RUNNING;
    }
}

void copy_obs(const Observation& o, double* out, std::size_t len)
{
    if (!out)
        return;
    if (len < o.dim())
        throw Error(ErrorKind::Usage, "observation buffer too small: need " + std::to_string(o.dim()));
    o.flatten_into({out, o.dim()});
}

std::string transition_summary(const std::vector<Transition>& records, std::size_t obs_dim)
{
    std::size_t done = 0;
    double sum = 0.0, lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const double r = records[i].reward;
        done += records[i].done;
        sum += r;
        lo = i == 0 ? r : std::min(lo, r);
        hi = i == 0 ? r : std::max(hi, r);
    }
    const double mean = records.empty() ? 0.0 : sum / static_cast<double>(records.size());
    return "# records=" + std::to_string(records.size()) + " obs_dim=" + std::to_string(obs_dim) +
           " done=" + std::to_string(done) + " reward_mean=" + textio::format_g9(mean) +
           " reward_min=" + textio::format_g9(lo) + " reward_max=" + textio::format_g9(hi) + "\n";
}

void require_file(const char* path, const char* what)
{
    need(path, what);
    if (!fs::exists(path))
        throw NotFoundError(std::string(what) + " not found: " + path);
}

void write_suite(const fs::path& dir, const std::vector<TaskResult>& results)
{
    fs::create_directories(dir);
    textio::write_file(dir / "results.txt", format_results(results));
    for (const TaskResult& r : results)
        textio::write_file(dir / ("traj_" + std::to_string(r.task_id) + ".txt"), r.trajectory);
    textio::write_file(dir / "metrics.txt", format_metrics(compute_metrics({results})[0]));
}

} // namespace

extern "C" {

const char* mn_last_error(void) { return g_last_error.c_str(); }

const char* mn_version(void) { return "1.0.0"; }

void mn_string_free(char* s) { std::free(s); }

// --- Maps ---

mn_status mn_map_load(const char* path, mn_map** out)
{
    return guarded([&] {
        require_file(path, "map");
        need(out, "out");
        *out = new mn_map{std::make_shared<const WorldMap>(load_scenario_file(path))};
    });
}

mn_status mn_map_parse(const char* text, mn_map** out)
{
    return guarded([&] {
        need(text, "text");
        need(out, "out");
        *out = new mn_map{std::make_shared<const WorldMap>(load_scenario(text))};
    });
}

void mn_map_free(mn_map* map) { delete map; }

mn_status mn_map_size(const mn_map* map, double* width, double* height)
{
    return guarded([&] {
        need(map, "map");
        if (width)
            *width = map->map->width;
        if (height)
            *height = map->map->height;
    });
}

mn_status mn_map_segment_count(const mn_map* map, size_t* count)
{
    return guarded([&] {
        need(map, "map");
        need(count, "count");
        *count = map->map->segments.size();
    });
}

mn_status mn_map_serialize(const mn_map* map, char** text)
{
    return guarded([&] {
        need(map, "map");
        need(text, "text");
        *text = dup(serialize_scenario(*map->map));
    });
}

mn_status mn_gen_maps(const char* dir)
{
    return guarded([&] {
        need(dir, "dir");
        const auto grid = generate_training_grid();
        fs::create_directories(dir);
        for (const WorldMap& m : grid)
            save_scenario_file(m, fs::path(dir) / (m.name + ".txt"));
    });
}

// --- Environment ---

mn_status mn_env_create(const mn_map* map, mn_env** out)
{
    return guarded([&] {
        need(map, "map");
        need(out, "out");
        *out = new mn_env{Environment(map->map)};
    });
}

void mn_env_free(mn_env* env) { delete env; }

size_t mn_env_obs_dim(const mn_env* env)
{
    return env ? static_cast<size_t>(env->env.spec().minpool_sectors) + 4 : 0;
}

mn_status mn_env_reset(mn_env* env, double x, double y, double theta, double goal_x, double goal_y, int max_steps,
                       double* obs, size_t obs_len)
{
    return guarded([&] {
        need(env, "env");
        const TaskSpec task{{x, y, theta}, {goal_x, goal_y}, max_steps};
        validate_task(env->env.map(), task, env->env.spec());
        copy_obs(env->env.reset(task), obs, obs_len);
    });
}

mn_status mn_env_step(mn_env* env, double v, double w, double* obs, size_t obs_len, double* reward,
                      mn_outcome* outcome)
{
    return guarded([&] {
        need(env, "env");
        const StepResult r = env->env.step({v, w});
        copy_obs(r.obs, obs, obs_len);
        if (reward)
            *reward = r.reward;
        if (outcome)
            *outcome = to_c(r.outcome);
    });
}

mn_status mn_env_pose(const mn_env* env, double* x, double* y, double* theta)
{
    return guarded([&] {
        need(env, "env");
        const Pose& p = env->env.pose();
        if (x)
            *x = p.x;
        if (y)
            *y = p.y;
        if (theta)
            *theta = p.theta;
    });
}

// --- Training ---

mn_status mn_trainer_create(const char* config_text, uint64_t seed, const char* out_dir, int mirror_enabled,
                            int curriculum_enabled, mn_trainer** out)
{
    return guarded([&] {
        need(config_text, "config_text");
        need(out, "out");
        TrainRunConfig cfg = parse_train_config(config_text);
        cfg.seed = seed;
        cfg.mirror_enabled = mirror_enabled != 0;
        cfg.curriculum_enabled = curriculum_enabled != 0;
        cfg.out_dir = out_dir ? out_dir : "";
        *out = new mn_trainer{Trainer(cfg)};
    });
}

mn_status mn_trainer_resume(const char* checkpoint, long long total_steps, const char* out_dir, mn_trainer** out)
{
    return guarded([&] {
        require_file(checkpoint, "checkpoint");
        need(out, "out");
        std::optional<long long> budget;
        if (total_steps >= 0)
            budget = total_steps;
        std::optional<std::string> dir;
        if (out_dir)
            dir = out_dir;
        *out = new mn_trainer{Trainer::resume(checkpoint, budget, dir)};
    });
}

void mn_trainer_free(mn_trainer* t) { delete t; }

mn_status mn_trainer_run(mn_trainer* t)
{
    return guarded([&] {
        need(t, "trainer");
        t->trainer.run();
    });
}

mn_status mn_trainer_run_episode(mn_trainer* t, mn_outcome* outcome, int* steps)
{
    return guarded([&] {
        need(t, "trainer");
        const EpisodeRecord r = t->trainer.run_episode();
        if (outcome)
            *outcome = to_c(r.outcome);
        if (steps)
            *steps = r.steps;
    });
}

mn_status mn_trainer_save(const mn_trainer* t, const char* path)
{
    return guarded([&] {
        need(t, "trainer");
        need(path, "path");
        t->trainer.save_checkpoint(path);
    });
}

mn_status mn_trainer_counters(const mn_trainer* t, long long* episodes, long long* steps, long long* updates,
                              size_t* buffer_size)
{
    return guarded([&] {
        need(t, "trainer");
        if (episodes)
            *episodes = t->trainer.episodes();
        if (steps)
            *steps = t->trainer.total_steps();
        if (updates)
            *updates = t->trainer.updates();
        if (buffer_size)
            *buffer_size = t->trainer.buffer().size();
    });
}

mn_status mn_trainer_log(const mn_trainer* t, char** text)
{
    return guarded([&] {
        need(t, "trainer");
        need(text, "text");
        *text = dup(t->trainer.log_text());
    });
}

mn_status mn_train_file(const char* config_path, uint64_t seed, const char* out_dir, int mirror_enabled,
                        int curriculum_enabled)
{
    return guarded([&] {
        require_file(config_path, "config");
        need(out_dir, "out_dir");
        TrainRunConfig cfg = parse_train_config(textio::read_file(config_path));
        resolve_map_paths(cfg, std::filesystem::path(config_path).parent_path());
        cfg.seed = seed;
        cfg.mirror_enabled = mirror_enabled != 0;
        cfg.curriculum_enabled = curriculum_enabled != 0;
        cfg.out_dir = out_dir;
        Trainer t(cfg);
        t.run();
    });
}

// --- Policies ---

mn_status mn_policy_load(const char* checkpoint, mn_policy** out)
{
    return guarded([&] {
        require_file(checkpoint, "checkpoint");
        need(out, "out");
        *out = new mn_policy{load_agent(checkpoint)};
    });
}

mn_status mn_policy_from_trainer(const mn_trainer* t, mn_policy** out)
{
    return guarded([&] {
        need(t, "trainer");
        need(out, "out");
        *out = new mn_policy{t->trainer.agent_snapshot()};
    });
}

void mn_policy_free(mn_policy* p) { delete p; }

mn_status mn_policy_act(const mn_policy* p, const double* obs, size_t obs_len, double* v, double* w)
{
    return guarded([&] {
        need(p, "policy");
        need(obs, "obs");
        const auto expected = static_cast<size_t>(p->agent->actor.obs_dim());
        if (obs_len != expected)
            throw Error(ErrorKind::Usage, "observation length " + std::to_string(obs_len) + " != " + std::to_string(expected));
        const Action a = p->agent->act_deterministic(Observation::from_flat({obs, obs_len}));
        if (v)
            *v = a.v;
        if (w)
            *w = a.w;
    });
}

// --- Evaluation ---

mn_status mn_eval(const mn_policy* p, const char* map_path, const char* tasks_path, uint64_t seed, int jobs,
                  const char* out_dir, char** summary)
{
    return guarded([&] {
        need(p, "policy");
        need(out_dir, "out_dir");
        require_file(map_path, "map");
        require_file(tasks_path, "tasks");
        auto map = std::make_shared<const WorldMap>(load_scenario_file(map_path, p->agent->spec()));
        std::vector<TaskSpec> tasks;
        try {
            tasks = parse_tasks(textio::read_file(tasks_path));
        } catch (const ParseError& e) {
            throw Error(ErrorKind::Parse, std::string(tasks_path) + ": " + e.what());
        }
        ActorPolicy policy(p->agent);
        const auto results = run_task_suite(policy, map, tasks, {seed, jobs, true}, p->agent->spec());
        write_suite(out_dir, results);
        textio::write_file(fs::path(out_dir) / "tasks.txt", format_tasks(tasks));
        if (summary)
            *summary = dup(format_metrics(compute_metrics({results})[0]));
    });
}

mn_status mn_challenge(const mn_policy* p, const char* out_dir, int jobs, char** summary)
{
    return guarded([&] {
        need(p, "policy");
        need(out_dir, "out_dir");
        ActorPolicy policy(p->agent);
        std::string text;
        for (const ChallengeScenario& sc : build_challenge_scenarios(p->agent->spec())) {
            const fs::path base = fs::path(out_dir) / sc.name;
            save_scenario_file(*sc.map, (fs::create_directories(base), base / "map.txt"));
            std::vector<TaskSpec> backward;
            for (const TaskSpec& t : sc.tasks)
                backward.push_back(reversed_task(t));
            for (const auto& [label, tasks] : {std::pair{"forward", sc.tasks}, std::pair{"backward", backward}}) {
                const auto results = run_task_suite(policy, sc.map, tasks, {0, jobs, true}, p->agent->spec());
                write_suite(base / label, results);
                textio::write_file(base / label / "tasks.txt", format_tasks(tasks));
                text += sc.name + " " + label + ": " + format_metrics(compute_metrics({results})[0]);
            }
        }
        textio::write_file(fs::path(out_dir) / "summary.txt", text);
        if (summary)
            *summary = dup(text);
    });
}

// --- Inspection ---

mn_status mn_inspect_buffer(const char* path, char** text)
{
    return guarded([&] {
        require_file(path, "buffer");
        need(text, "text");
        const std::string bytes = textio::read_file(path);
        if (bytes.rfind("MAERCKPT", 0) == 0) {
            const auto entries = decode_checkpoint(bytes);
            const CheckpointEntry* raw = nullptr;
            const CheckpointEntry* meta = nullptr;
            for (const auto& e : entries) {
                if (e.name == "buffer")
                    raw = &e;
                if (e.name == "buffer.meta")
                    meta = &e;
            }
            if (!raw || !meta)
                throw Error(ErrorKind::Parse, "checkpoint holds no replay buffer");
            std::size_t cap = 0, dim = 0, size = 0, cursor = 0;
            if (std::sscanf(meta->text.c_str(), "%zu %zu %zu %zu", &cap, &dim, &size, &cursor) != 4)
                throw Error(ErrorKind::Parse, "corrupt buffer metadata");
            ReplayBuffer buf(cap, dim);
            buf.restore(raw->values, size, cursor);
            std::vector<Transition> records;
            for (std::size_t i = 0; i < buf.size(); ++i)
                records.push_back(buf.at(i));
            *text = dup(transition_summary(records, dim) + dump_buffer(buf));
            return;
        }
        const auto records = parse_transition_dump(bytes);
        const std::size_t dim = records.empty() ? 0 : records.front().obs.dim();
        *text = dup(transition_summary(records, dim) + dump_transitions(records));
    });
}

mn_status mn_inspect_checkpoint(const char* path, char** text)
{
    return guarded([&] {
        require_file(path, "checkpoint");
        need(text, "text");
        *text = dup(describe_checkpoint(path));
    });
}

mn_status mn_plot(const char* results_path, const char* map_path, const char* out_file)
{
    return guarded([&] {
        require_file(results_path, "results");
        need(out_file, "out_file");
        const std::string text = textio::read_file(results_path);
        std::string svg;
        if (text.rfind("# episode", 0) == 0) {
            svg = render_returns_svg(parse_training_returns(text), "episode return");
        } else {
            require_file(map_path, "map");
            const WorldMap map = load_scenario_file(map_path);
            const auto results = parse_results(text);
            const fs::path dir = fs::path(results_path).parent_path();
            std::vector<PlotTrack> tracks;
            for (const TaskResult& r : results) {
                const fs::path traj = dir / ("traj_" + std::to_string(r.task_id) + ".txt");
                if (fs::exists(traj))
                    tracks.push_back({parse_trajectory(textio::read_file(traj)), r.outcome});
            }
            std::vector<TaskSpec> tasks;
            if (fs::exists(dir / "tasks.txt"))
                tasks = parse_tasks(textio::read_file(dir / "tasks.txt"));
            svg = render_trajectories_svg(map, tracks, tasks);
        }
        const fs::path out(out_file);
        if (out.has_parent_path())
            fs::create_directories(out.parent_path());
        textio::write_file(out, svg);
    });
}

} // extern "C"
