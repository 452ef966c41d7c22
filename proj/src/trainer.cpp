#include "maernav/trainer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "maernav/error.hpp"
#include "maernav/eval.hpp"
#include "maernav/textio.hpp"

namespace maernav {

namespace fs = std::filesystem;

// --- Config ---

void TrainRunConfig::validate() const
{
    if (total_steps < 1)
        throw ConfigError("total_steps must be >= 1");
    if (warmup_steps < 0)
        throw ConfigError("warmup_steps must be >= 0");
    if (updates_per_step < 0)
        throw ConfigError("updates_per_step must be >= 0");
    if (buffer_capacity < 1)
        throw ConfigError("buffer_capacity must be >= 1");
    if (max_episode_steps < 1)
        throw ConfigError("max_episode_steps must be >= 1");
    if (checkpoint_every < 1 || eval_every < 1)
        throw ConfigError("cadences must be >= 1");
    if (eval_tasks < 0)
        throw ConfigError("eval_tasks must be >= 0");
    if (!(min_task_distance >= 0.0) || !(max_task_distance > min_task_distance))
        throw ConfigError("task distance range must satisfy 0 <= min < max");
    if (maps.empty())
        throw ConfigError("maps must name 'grid' or scenario files");
    sac.validate();
    try {
        robot.validate();
        reward.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

namespace {

struct Field {
    std::function<void(std::string_view)> set;
    std::function<std::string()> get;
};

double to_double(std::string_view v)
{
    double d = 0.0;
    if (!textio::parse_double(v, d) || !std::isfinite(d))
        throw ConfigError("expected a number, got '" + std::string(v) + "'");
    return d;
}

long long to_int(std::string_view v)
{
    long long i = 0;
    if (!textio::parse_int(v, i))
        throw ConfigError("expected an integer, got '" + std::string(v) + "'");
    return i;
}

bool to_bool(std::string_view v)
{
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw ConfigError("expected true or false, got '" + std::string(v) + "'");
}

std::map<std::string, Field> fields(TrainRunConfig& c)
{
    std::map<std::string, Field> f;
    auto dbl = [&f](const std::string& key, double& ref) {
        f[key] = {[&ref](std::string_view v) { ref = to_double(v); }, [&ref] { return textio::format_double(ref); }};
    };
    auto integer = [&f](const std::string& key, auto& ref) {
        f[key] = {[&ref](std::string_view v) {
                      const long long i = to_int(v);
                      using T = std::remove_reference_t<decltype(ref)>;
                      if (i < 0 && std::is_unsigned_v<T>)
                          throw ConfigError("expected a nonnegative integer");
                      ref = static_cast<T>(i);
                  },
                  [&ref] { return std::to_string(ref); }};
    };
    auto boolean = [&f](const std::string& key, bool& ref) {
        f[key] = {[&ref](std::string_view v) { ref = to_bool(v); }, [&ref] { return std::string(ref ? "true" : "false"); }};
    };
    integer("total_steps", c.total_steps);
    integer("seed", c.seed);
    integer("warmup_steps", c.warmup_steps);
    integer("updates_per_step", c.updates_per_step);
    integer("buffer_capacity", c.buffer_capacity);
    integer("max_episode_steps", c.max_episode_steps);
    integer("checkpoint_every", c.checkpoint_every);
    integer("eval_every", c.eval_every);
    integer("eval_tasks", c.eval_tasks);
    boolean("mirror_enabled", c.mirror_enabled);
    boolean("curriculum_enabled", c.curriculum_enabled);
    boolean("curriculum_counts_warmup", c.curriculum_counts_warmup);
    f["maps"] = {[&c](std::string_view v) { c.maps = std::string(v); }, [&c] { return c.maps; }};
    dbl("min_task_distance", c.min_task_distance);
    dbl("max_task_distance", c.max_task_distance);
    boolean("random_start_heading", c.random_start_heading);

    integer("hidden_width", c.sac.hidden_width);
    integer("hidden_layers", c.sac.hidden_layers);
    dbl("leaky_slope", c.sac.leaky_slope);
    integer("components", c.sac.components);
    dbl("beta_init", c.sac.beta_init);
    dbl("lr_actor", c.sac.lr_actor);
    dbl("lr_critic", c.sac.lr_critic);
    dbl("lr_alpha", c.sac.lr_alpha);
    integer("batch_size", c.sac.batch_size);
    dbl("tau", c.sac.tau);
    dbl("gamma", c.sac.gamma);
    dbl("target_entropy", c.sac.target_entropy);
    dbl("init_alpha", c.sac.init_alpha);

    integer("minpool_sectors", c.robot.minpool_sectors);
    integer("lidar_beams", c.robot.lidar_beams);
    dbl("lidar_max_range", c.robot.lidar_max_range);
    dbl("dt", c.robot.dt);

    dbl("c1", c.reward.c1);
    dbl("success_reward", c.reward.success_reward);
    dbl("crash_reward", c.reward.crash_reward);
    dbl("epsilon_goal", c.reward.epsilon_goal);
    return f;
}

} // namespace

TrainRunConfig parse_train_config(const std::string& text)
{
    TrainRunConfig cfg;
    auto f = fields(cfg);
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string_view line = textio::strip_comment(raw);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string_view s) {
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
                s.remove_prefix(1);
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
                s.remove_suffix(1);
            return s;
        };
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        const auto it = f.find(key);
        if (it == f.end())
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        try {
            it->second.set(value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + key + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

std::string serialize_train_config(const TrainRunConfig& cfg)
{
    TrainRunConfig copy = cfg;
    std::string s;
    for (const auto& [key, field] : fields(copy))
        s += key + " = " + field.get() + "\n";
    return s;
}

// --- Log rows ---

std::string format_episode_record(const EpisodeRecord& r)
{
    using textio::format_g9;
    std::string s = std::to_string(r.episode) + ' ' + std::to_string(r.env) + ' ' + std::string(outcome_name(r.outcome)) +
                    ' ' + std::to_string(r.steps) + ' ' + format_g9(r.ret) + ' ' + std::to_string(r.total_steps) + ' ' +
                    format_g9(r.recent_success) + ' ' + std::to_string(r.buffer_size) + ' ' + std::to_string(r.updates);
    for (double v : {r.loss.critic1, r.loss.critic2, r.loss.actor, r.loss.alpha})
        s += ' ' + format_g9(v);
    return s + '\n';
}

std::vector<double> parse_training_returns(const std::string& text)
{
    std::vector<double> out;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto line = textio::strip_comment(raw);
        if (line.empty())
            continue;
        const auto tok = textio::split_ws(line);
        double r = 0.0;
        if (tok.size() != 13 || !textio::parse_double(tok[4], r))
            throw ParseError(lineno, "malformed training log row");
        out.push_back(r);
    }
    return out;
}

// --- Trainer ---

namespace {

constexpr std::size_t kRecentWindow = 100;

std::vector<WorldMap> load_maps(const TrainRunConfig& cfg)
{
    if (cfg.maps == "grid")
        return generate_training_grid();
    std::vector<WorldMap> out;
    std::string_view rest = cfg.maps;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        std::string_view item = rest.substr(0, comma);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        while (!item.empty() && item.front() == ' ')
            item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ')
            item.remove_suffix(1);
        if (!item.empty())
            out.push_back(load_scenario_file(std::string(item), cfg.robot));
    }
    if (out.empty())
        throw ConfigError("no maps listed");
    return out;
}

} // namespace

void resolve_map_paths(TrainRunConfig& cfg, const fs::path& base)
{
    if (cfg.maps == "grid")
        return;
    std::string joined;
    std::string_view rest = cfg.maps;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        std::string item(rest.substr(0, comma));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        item.erase(0, item.find_first_not_of(' '));
        item.erase(item.find_last_not_of(' ') + 1);
        if (item.empty())
            continue;
        fs::path p(item);
        if (p.is_relative())
            p = base / p;
        joined += (joined.empty() ? "" : ",") + p.string();
    }
    cfg.maps = joined;
}

namespace {

CurriculumConfig curriculum_shape(std::size_t n_maps)
{
    CurriculumConfig c;
    if (n_maps == static_cast<std::size_t>(kGridSize * kGridSize)) {
        c.rows = c.cols = kGridSize;
    } else {
        c.rows = 1;
        c.cols = static_cast<int>(n_maps);
    }
    return c;
}

} // namespace

Trainer::Trainer(TrainRunConfig cfg) : cfg_(std::move(cfg))
{
    cfg_.validate();
    init(load_maps(cfg_));
}

Trainer::Trainer(TrainRunConfig cfg, std::vector<WorldMap> maps) : cfg_(std::move(cfg))
{
    cfg_.validate();
    init(std::move(maps));
}

void Trainer::init(std::vector<WorldMap> maps)
{
    if (maps.empty())
        throw ConfigError("training needs at least one map");
    for (WorldMap& m : maps) {
        validate_map(m, cfg_.robot);
        if (m.start_poses.empty() || m.goal_points.empty())
            throw ValidationError("map '" + m.name + "' has no start poses or goals");
        maps_.push_back(std::make_shared<const WorldMap>(std::move(m)));
    }
    Rng init_rng(derive_seed(cfg_.seed, 1));
    agent_ = std::make_unique<SacAgent>(cfg_.robot.minpool_sectors, cfg_.sac, cfg_.robot, init_rng);
    buffer_ = ReplayBuffer(cfg_.buffer_capacity, static_cast<std::size_t>(cfg_.robot.minpool_sectors) + 4);
    curriculum_ = Curriculum(curriculum_shape(maps_.size()));
    if (!cfg_.curriculum_enabled)
        curriculum_.unlock_all();
    curriculum_rng_ = Rng(derive_seed(cfg_.seed, 2));
    action_rng_ = Rng(derive_seed(cfg_.seed, 3));
    update_rng_ = Rng(derive_seed(cfg_.seed, 4));
    env_rngs_.clear();
    for (std::size_t i = 0; i < maps_.size(); ++i)
        env_rngs_.emplace_back(derive_seed(cfg_.seed, 1000 + i));
}

TaskSpec Trainer::sample_task(int env)
{
    const WorldMap& m = *maps_[static_cast<std::size_t>(env)];
    Rng& rng = env_rngs_[static_cast<std::size_t>(env)];
    TaskSpec t;
    t.max_steps = cfg_.max_episode_steps;
    t.start = m.start_poses[rng.index(m.start_poses.size())];
    if (cfg_.random_start_heading)
        t.start.theta = wrap_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));
    std::vector<std::size_t> ok;
    for (std::size_t i = 0; i < m.goal_points.size(); ++i) {
        const double d = norm(m.goal_points[i] - Vec2{t.start.x, t.start.y});
        if (d >= cfg_.min_task_distance && d <= cfg_.max_task_distance)
            ok.push_back(i);
    }
    if (ok.empty()) {
        for (std::size_t i = 0; i < m.goal_points.size(); ++i)
            if (norm(m.goal_points[i] - Vec2{t.start.x, t.start.y}) >= cfg_.reward.epsilon_goal)
                ok.push_back(i);
    }
    if (ok.empty())
        throw ValidationError("map '" + m.name + "' has no goal away from its start poses");
    t.goal = m.goal_points[ok[rng.index(ok.size())]];
    return t;
}

EpisodeRecord Trainer::run_episode()
{
    int env = 0;
    if (cfg_.curriculum_enabled) {
        const EnvId id = curriculum_.sample_env(curriculum_rng_);
        env = id.row * curriculum_.config().cols + id.col;
    } else {
        env = static_cast<int>(curriculum_rng_.index(maps_.size()));
    }
    const TaskSpec task = sample_task(env);
    Environment sim(maps_[static_cast<std::size_t>(env)], cfg_.robot, cfg_.reward);
    Observation obs = sim.reset(task);
    const bool warm_start = total_steps_ < cfg_.warmup_steps;

    EpisodeRecord rec;
    rec.env = env;
    mirror_.clear();
    while (!sim.done()) {
        Action a;
        if (total_steps_ < cfg_.warmup_steps)
            a = {action_rng_.uniform(-cfg_.robot.v_max, cfg_.robot.v_max),
                 action_rng_.uniform(-cfg_.robot.w_max, cfg_.robot.w_max)};
        else
            a = agent_->act(obs, action_rng_);
        const Pose before = sim.pose();
        StepResult s = sim.step(a);
        ++total_steps_;
        // Time limits truncate rather than terminate, so timeouts keep their bootstrap.
        const bool terminal = s.outcome == Outcome::Success || s.outcome == Outcome::Crash;
        Transition t{obs, s.action, s.reward, s.obs, terminal};
        buffer_.push(t);
        if (cfg_.mirror_enabled)
            mirror_.push({t.obs, t.action, t.reward, t.next_obs, t.done, before, s.pose});
        rec.ret += s.reward;
        obs = std::move(s.obs);
    }
    const bool success = sim.outcome() == Outcome::Success;
    if (cfg_.mirror_enabled)
        synthetic_ += static_cast<long long>(on_episode_end(success, buffer_, mirror_, task.start, cfg_.reward));
    mirror_.clear();

    if (cfg_.curriculum_enabled && (cfg_.curriculum_counts_warmup || !warm_start))
        curriculum_.record_outcome({env / curriculum_.config().cols, env % curriculum_.config().cols}, success);

    const long long due = std::max(0LL, total_steps_ - cfg_.warmup_steps) * cfg_.updates_per_step;
    LossReport sum;
    const long long n = due - updates_;
    for (; updates_ < due; ++updates_) {
        const auto slots = buffer_.sample_indices(static_cast<std::size_t>(cfg_.sac.batch_size), update_rng_);
        const LossReport l = agent_->update(make_batch(buffer_, slots), update_rng_);
        sum.critic1 += l.critic1;
        sum.critic2 += l.critic2;
        sum.actor += l.actor;
        sum.alpha_loss += l.alpha_loss;
    }
    if (n > 0) {
        sum.critic1 /= static_cast<double>(n);
        sum.critic2 /= static_cast<double>(n);
        sum.actor /= static_cast<double>(n);
        sum.alpha_loss /= static_cast<double>(n);
    }
    sum.alpha = agent_->alpha();

    recent_.push_back(success);
    if (recent_.size() > kRecentWindow)
        recent_.pop_front();

    ++episodes_;
    rec.episode = episodes_;
    rec.outcome = sim.outcome();
    rec.steps = sim.steps();
    rec.total_steps = total_steps_;
    rec.recent_success =
        static_cast<double>(std::count(recent_.begin(), recent_.end(), true)) / static_cast<double>(recent_.size());
    rec.buffer_size = buffer_.size();
    rec.updates = updates_;
    rec.loss = sum;
    const std::string row = format_episode_record(rec);
    if (log_.empty())
        log_ = kTrainLogHeader;
    log_ += row;
    append_log(episodes_ == 1 ? std::string(kTrainLogHeader) + row : row, "train_log.txt");
    return rec;
}

void Trainer::append_log(const std::string& text, const char* file)
{
    if (cfg_.out_dir.empty())
        return;
    fs::create_directories(cfg_.out_dir);
    std::ofstream out(fs::path(cfg_.out_dir) / file, std::ios::binary | std::ios::app);
    out << text;
    if (!out)
        throw IoError("cannot append to " + (fs::path(cfg_.out_dir) / file).string());
}

void Trainer::periodic_eval()
{
    if (cfg_.eval_tasks == 0)
        return;
    // The same task list every time, drawn from a dedicated stream.
    Rng pick(derive_seed(cfg_.seed, 5));
    const auto snapshot = agent_snapshot();
    ActorPolicy policy(snapshot);
    std::vector<TaskResult> all;
    for (int i = 0; i < cfg_.eval_tasks; ++i) {
        const std::size_t env = pick.index(maps_.size());
        const WorldMap& m = *maps_[env];
        TaskSpec t;
        t.max_steps = cfg_.max_episode_steps;
        t.start = m.start_poses[pick.index(m.start_poses.size())];
        t.goal = m.goal_points[pick.index(m.goal_points.size())];
        if (norm(t.goal - Vec2{t.start.x, t.start.y}) < cfg_.reward.epsilon_goal)
            continue;
        auto r = run_task_suite(policy, maps_[env], {t}, {cfg_.seed, 1, false}, cfg_.robot, cfg_.reward);
        r[0].task_id = i;
        all.push_back(r[0]);
    }
    if (all.empty())
        return;
    const MetricsReport m = compute_metrics({all})[0];
    append_log(std::to_string(episodes_) + ' ' + std::to_string(total_steps_) + ' ' + format_metrics(m), "eval_log.txt");
}

void Trainer::run()
{
    if (!cfg_.out_dir.empty()) {
        fs::create_directories(cfg_.out_dir);
        if (episodes_ == 0) {
            fs::remove(fs::path(cfg_.out_dir) / "train_log.txt");
            fs::remove(fs::path(cfg_.out_dir) / "eval_log.txt");
        }
    }
    while (total_steps_ < cfg_.total_steps) {
        run_episode();
        if (!cfg_.out_dir.empty() && episodes_ % cfg_.checkpoint_every == 0)
            save_checkpoint(fs::path(cfg_.out_dir) / "checkpoint.bin");
        if (!cfg_.out_dir.empty() && episodes_ % cfg_.eval_every == 0)
            periodic_eval();
    }
    if (!cfg_.out_dir.empty())
        save_checkpoint(fs::path(cfg_.out_dir) / "checkpoint.bin");
}

// --- Checkpoint content ---

namespace {

/// Eigen stores column-major; checkpoints hold row-major values.
std::vector<double> to_row_major(const double* data, std::size_t rows, std::size_t cols)
{
    std::vector<double> out(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            out[r * cols + c] = data[c * rows + r];
    return out;
}

void from_row_major(const std::vector<double>& in, double* data, std::size_t rows, std::size_t cols)
{
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            data[c * rows + r] = in[r * cols + c];
}

CheckpointEntry text_entry(std::string name, std::string text)
{
    CheckpointEntry e;
    e.name = std::move(name);
    e.is_text = true;
    e.text = std::move(text);
    return e;
}

std::vector<CheckpointEntry> agent_entries(SacAgent& agent)
{
    std::vector<CheckpointEntry> out;
    for (const auto& a : agent.state_arrays()) {
        CheckpointEntry e;
        e.name = a.name;
        e.shape.assign(a.shape.begin(), a.shape.end());
        e.values = to_row_major(a.data, a.shape[0], a.shape[1]);
        out.push_back(std::move(e));
    }
    std::ostringstream steps;
    steps << agent.actor_opt.steps() << ' ' << agent.q1_opt.steps() << ' ' << agent.q2_opt.steps() << ' '
          << agent.alpha_opt.steps();
    out.push_back(text_entry("opt.steps", steps.str()));
    return out;
}

void restore_agent(SacAgent& agent, const std::map<std::string, const CheckpointEntry*>& by_name)
{
    for (const auto& a : agent.state_arrays()) {
        const auto it = by_name.find(a.name);
        if (it == by_name.end() || it->second->is_text)
            throw Error(ErrorKind::Parse, "checkpoint lacks array '" + a.name + "'");
        const CheckpointEntry& e = *it->second;
        if (e.shape.size() != 2 || e.shape[0] != a.shape[0] || e.shape[1] != a.shape[1])
            throw Error(ErrorKind::Parse, "checkpoint array '" + a.name + "' has the wrong shape");
        from_row_major(e.values, a.data, a.shape[0], a.shape[1]);
    }
    const auto it = by_name.find("opt.steps");
    if (it == by_name.end())
        throw Error(ErrorKind::Parse, "checkpoint lacks optimizer step counts");
    std::istringstream in(it->second->text);
    long long s[4];
    if (!(in >> s[0] >> s[1] >> s[2] >> s[3]))
        throw Error(ErrorKind::Parse, "corrupt optimizer step counts");
    agent.actor_opt.set_steps(s[0]);
    agent.q1_opt.set_steps(s[1]);
    agent.q2_opt.set_steps(s[2]);
    agent.alpha_opt.set_steps(s[3]);
}

std::map<std::string, const CheckpointEntry*> index_entries(const std::vector<CheckpointEntry>& entries)
{
    std::map<std::string, const CheckpointEntry*> m;
    for (const auto& e : entries)
        m[e.name] = &e;
    return m;
}

const std::string& need_text(const std::map<std::string, const CheckpointEntry*>& m, const std::string& name)
{
    const auto it = m.find(name);
    if (it == m.end() || !it->second->is_text)
        throw Error(ErrorKind::Parse, "checkpoint lacks '" + name + "'");
    return it->second->text;
}

} // namespace

std::string Trainer::checkpoint_bytes() const
{
    std::vector<CheckpointEntry> e;
    e.push_back(text_entry("config", serialize_train_config(cfg_)));
    e.push_back(text_entry("maps.count", std::to_string(maps_.size())));
    for (std::size_t i = 0; i < maps_.size(); ++i)
        e.push_back(text_entry("map." + std::to_string(i), serialize_scenario(*maps_[i])));
    auto agent_part = agent_entries(*agent_);
    e.insert(e.end(), std::make_move_iterator(agent_part.begin()), std::make_move_iterator(agent_part.end()));

    CheckpointEntry buf;
    buf.name = "buffer";
    buf.values = buffer_.raw();
    buf.shape = {buf.values.size() / buffer_.stride(), buffer_.stride()};
    e.push_back(std::move(buf));
    e.push_back(text_entry("buffer.meta", std::to_string(buffer_.capacity()) + ' ' + std::to_string(buffer_.obs_dim()) +
                                              ' ' + std::to_string(buffer_.size()) + ' ' +
                                              std::to_string(buffer_.cursor())));
    e.push_back(text_entry("curriculum", curriculum_.serialize()));
    e.push_back(text_entry("rng.curriculum", curriculum_rng_.state()));
    e.push_back(text_entry("rng.action", action_rng_.state()));
    e.push_back(text_entry("rng.update", update_rng_.state()));
    for (std::size_t i = 0; i < env_rngs_.size(); ++i)
        e.push_back(text_entry("rng.env." + std::to_string(i), env_rngs_[i].state()));
    std::string recent;
    for (bool b : recent_)
        recent += b ? '1' : '0';
    e.push_back(text_entry("recent", recent));
    e.push_back(text_entry("counters", std::to_string(episodes_) + ' ' + std::to_string(total_steps_) + ' ' +
                                           std::to_string(updates_) + ' ' + std::to_string(synthetic_)));
    return encode_checkpoint(e);
}

void Trainer::save_checkpoint(const fs::path& path) const
{
    textio::write_file(path, checkpoint_bytes());
}

Trainer Trainer::from_bytes(const std::string& bytes)
{
    const auto entries = decode_checkpoint(bytes);
    const auto m = index_entries(entries);
    TrainRunConfig cfg;
    try {
        cfg = parse_train_config(need_text(m, "config"));
    } catch (const ConfigError& e) {
        throw Error(ErrorKind::Parse, std::string("checkpoint config: ") + e.what());
    }
    long long n_maps = 0;
    if (!textio::parse_int(need_text(m, "maps.count"), n_maps) || n_maps < 1)
        throw Error(ErrorKind::Parse, "corrupt map count");
    std::vector<WorldMap> maps;
    for (long long i = 0; i < n_maps; ++i)
        maps.push_back(load_scenario(need_text(m, "map." + std::to_string(i)), cfg.robot));

    Trainer t(cfg, std::move(maps));
    restore_agent(*t.agent_, m);

    std::istringstream meta(need_text(m, "buffer.meta"));
    std::size_t cap = 0, dim = 0, size = 0, cursor = 0;
    if (!(meta >> cap >> dim >> size >> cursor))
        throw Error(ErrorKind::Parse, "corrupt buffer metadata");
    const auto bit = m.find("buffer");
    if (bit == m.end() || bit->second->is_text)
        throw Error(ErrorKind::Parse, "checkpoint lacks the replay buffer");
    t.buffer_ = ReplayBuffer(cap, dim);
    t.buffer_.restore(bit->second->values, size, cursor);

    t.curriculum_ = Curriculum::deserialize(need_text(m, "curriculum"));
    t.curriculum_rng_.set_state(need_text(m, "rng.curriculum"));
    t.action_rng_.set_state(need_text(m, "rng.action"));
    t.update_rng_.set_state(need_text(m, "rng.update"));
    for (std::size_t i = 0; i < t.env_rngs_.size(); ++i)
        t.env_rngs_[i].set_state(need_text(m, "rng.env." + std::to_string(i)));
    t.recent_.clear();
    for (char c : need_text(m, "recent"))
        t.recent_.push_back(c == '1');
    std::istringstream counters(need_text(m, "counters"));
    if (!(counters >> t.episodes_ >> t.total_steps_ >> t.updates_ >> t.synthetic_))
        throw Error(ErrorKind::Parse, "corrupt counters");
    return t;
}

Trainer Trainer::resume(const fs::path& checkpoint, std::optional<long long> total_steps,
                        std::optional<std::string> out_dir)
{
    Trainer t = from_bytes(textio::read_file(checkpoint));
    if (total_steps)
        t.cfg_.total_steps = *total_steps;
    // Logs and later checkpoints go next to the checkpoint unless redirected.
    const fs::path here = checkpoint.parent_path().empty() ? fs::path(".") : checkpoint.parent_path();
    t.cfg_.out_dir = out_dir ? *out_dir : here.string();
    t.cfg_.validate();
    return t;
}

std::shared_ptr<SacAgent> load_agent(const fs::path& checkpoint)
{
    const auto entries = decode_checkpoint(textio::read_file(checkpoint));
    const auto m = index_entries(entries);
    TrainRunConfig cfg;
    try {
        cfg = parse_train_config(need_text(m, "config"));
    } catch (const ConfigError& e) {
        throw Error(ErrorKind::Parse, std::string("checkpoint config: ") + e.what());
    }
    Rng init(0);
    auto agent = std::make_shared<SacAgent>(cfg.robot.minpool_sectors, cfg.sac, cfg.robot, init);
    restore_agent(*agent, m);
    return agent;
}

std::string describe_checkpoint(const fs::path& checkpoint)
{
    const auto entries = decode_checkpoint(textio::read_file(checkpoint));
    const auto m = index_entries(entries);
    std::string s = "checkpoint version " + std::to_string(kCheckpointVersion) + "\n";
    if (m.count("counters"))
        s += "counters (episodes steps updates synthetic): " + m.at("counters")->text + "\n";
    if (m.count("buffer.meta"))
        s += "buffer (capacity obs_dim size cursor): " + m.at("buffer.meta")->text + "\n";
    std::size_t values = 0;
    for (const auto& e : entries) {
        if (e.is_text)
            continue;
        values += e.values.size();
        if (e.name.rfind("opt.", 0) == 0 || e.name == "buffer")
            continue;
        s += "  " + e.name + " [";
        for (std::size_t i = 0; i < e.shape.size(); ++i)
            s += (i ? "x" : "") + std::to_string(e.shape[i]);
        s += "]\n";
    }
    s += "arrays hold " + std::to_string(values) + " values\n";
    return s;
}

// --- Container ---

namespace {

constexpr char kMagic[8] = {'M', 'A', 'E', 'R', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little, "checkpoint encoding assumes a little-endian host");

template <class T>
void put(std::string& out, T v)
{
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

struct Reader {
    const std::string& s;
    std::size_t pos = 0;

    template <class T>
    T get()
    {
        if (s.size() - pos < sizeof(T))
            throw Error(ErrorKind::Parse, "checkpoint is truncated");
        T v;
        std::memcpy(&v, s.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }

    std::string bytes(std::uint64_t n)
    {
        if (s.size() - pos < n)
            throw Error(ErrorKind::Parse, "checkpoint is truncated");
        std::string out = s.substr(pos, n);
        pos += n;
        return out;
    }
};

} // namespace

std::string encode_checkpoint(const std::vector<CheckpointEntry>& entries, std::uint32_t version)
{
    std::string out(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, version);
    put<std::uint64_t>(out, entries.size());
    for (const auto& e : entries) {
        put<std::uint8_t>(out, e.is_text ? 1 : 0);
        put<std::uint64_t>(out, e.name.size());
        out += e.name;
        if (e.is_text) {
            put<std::uint64_t>(out, e.text.size());
            out += e.text;
            continue;
        }
        put<std::uint32_t>(out, static_cast<std::uint32_t>(e.shape.size()));
        std::uint64_t n = 1;
        for (auto d : e.shape) {
            put<std::uint64_t>(out, d);
            n *= d;
        }
        if (n != e.values.size())
            throw DomainError("checkpoint array '" + e.name + "' does not match its shape");
        out.append(reinterpret_cast<const char*>(e.values.data()), e.values.size() * sizeof(double));
    }
    return out;
}

std::vector<CheckpointEntry> decode_checkpoint(const std::string& bytes)
{
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw Error(ErrorKind::Parse, "not a checkpoint file");
    Reader r{bytes, sizeof kMagic};
    const auto version = r.get<std::uint32_t>();
    if (version != kCheckpointVersion)
        throw VersionError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                           std::to_string(kCheckpointVersion) + ")");
    const auto count = r.get<std::uint64_t>();
    std::vector<CheckpointEntry> out;
    for (std::uint64_t i = 0; i < count; ++i) {
        CheckpointEntry e;
        const auto kind = r.get<std::uint8_t>();
        if (kind > 1)
            throw Error(ErrorKind::Parse, "corrupt checkpoint entry");
        e.is_text = kind == 1;
        e.name = r.bytes(r.get<std::uint64_t>());
        if (e.is_text) {
            e.text = r.bytes(r.get<std::uint64_t>());
        } else {
            const auto ndim = r.get<std::uint32_t>();
            if (ndim > 8)
                throw Error(ErrorKind::Parse, "corrupt checkpoint array rank");
            std::uint64_t n = 1;
            for (std::uint32_t d = 0; d < ndim; ++d) {
                e.shape.push_back(r.get<std::uint64_t>());
                n *= e.shape.back();
            }
            if (n > (bytes.size() - r.pos) / sizeof(double))
                throw Error(ErrorKind::Parse, "checkpoint is truncated");
            e.values.resize(n);
            std::memcpy(e.values.data(), bytes.data() + r.pos, n * sizeof(double));
            r.pos += n * sizeof(double);
        }
        out.push_back(std::move(e));
    }
    if (r.pos != bytes.size())
        throw Error(ErrorKind::Parse, "trailing bytes after checkpoint");
    return out;
}

} // namespace maernav
