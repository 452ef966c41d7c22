#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "maernav/curriculum.hpp"
#include "maernav/learner.hpp"
#include "maernav/replay.hpp"
#include "maernav/rng.hpp"
#include "maernav/sim.hpp"
#include "maernav/world.hpp"

namespace maernav {

struct TrainRunConfig {
    long long total_steps = 200000;
    std::uint64_t seed = 0;
    long long warmup_steps = 5000;
    int updates_per_step = 1;
    std::size_t buffer_capacity = 1000000;
    int max_episode_steps = 400;
    int checkpoint_every = 500;  ///< episodes
    int eval_every = 1000;       ///< episodes
    int eval_tasks = 10;         ///< 0 disables periodic evaluation
    bool mirror_enabled = true;
    bool curriculum_enabled = true;
    bool curriculum_counts_warmup = true;
    /// "grid" for the generated 5x5 set, otherwise a comma-separated list of scenario files.
    std::string maps = "grid";
    double min_task_distance = 1.0;
    double max_task_distance = 10.0;
    bool random_start_heading = false;
    std::string out_dir;

    SacConfig sac;
    RobotSpec robot;
    RewardConfig reward;

    void validate() const;
};

/// key = value lines, '#' comments. Unknown keys and bad values raise ConfigError.
TrainRunConfig parse_train_config(const std::string& text);
std::string serialize_train_config(const TrainRunConfig& cfg);

/// Rewrites relative scenario paths in cfg.maps against base (usually the config file's directory).
void resolve_map_paths(TrainRunConfig& cfg, const std::filesystem::path& base);

struct EpisodeRecord {
    long long episode = 0;
    int env = 0;
    Outcome outcome = Outcome::Timeout;
    int steps = 0;
    double ret = 0.0;
    long long total_steps = 0;
    double recent_success = 0.0;
    std::size_t buffer_size = 0;
    long long updates = 0;
    LossReport loss;
};

inline constexpr const char* kTrainLogHeader =
    "# episode env outcome steps return total_steps sr100 buffer updates critic1 critic2 actor alpha\n";
std::string format_episode_record(const EpisodeRecord& r);
/// Per-episode returns from a training log.
std::vector<double> parse_training_returns(const std::string& text);

/// Sequential implementation of the training loop. One instance owns every piece of mutable state,
/// so a checkpoint of it is a complete description of the run.
class Trainer {
public:
    /// Fresh run. Maps come from cfg.maps.
    explicit Trainer(TrainRunConfig cfg);
    /// Fresh run on caller-provided maps (cfg.maps is ignored).
    Trainer(TrainRunConfig cfg, std::vector<WorldMap> maps);

    /// Restores a run from a checkpoint. The budget and output directory may be replaced.
    static Trainer resume(const std::filesystem::path& checkpoint, std::optional<long long> total_steps = {},
                          std::optional<std::string> out_dir = {});
    static Trainer from_bytes(const std::string& bytes);

    /// Runs one episode and its updates. Returns the log row.
    EpisodeRecord run_episode();
    /// Runs episodes until the step budget is spent; writes the log and checkpoints when out_dir is set.
    void run();

    std::string checkpoint_bytes() const;
    void save_checkpoint(const std::filesystem::path& path) const;

    const TrainRunConfig& config() const { return cfg_; }
    TrainRunConfig& mutable_config() { return cfg_; }
    const SacAgent& agent() const { return *agent_; }
    std::shared_ptr<const SacAgent> agent_snapshot() const { return std::make_shared<SacAgent>(*agent_); }
    const ReplayBuffer& buffer() const { return buffer_; }
    const MirrorBuffer& mirror_buffer() const { return mirror_; }
    const Curriculum& curriculum() const { return curriculum_; }
    const std::vector<std::shared_ptr<const WorldMap>>& maps() const { return maps_; }
    long long episodes() const { return episodes_; }
    long long total_steps() const { return total_steps_; }
    long long updates() const { return updates_; }
    long long synthetic_transitions() const { return synthetic_; }
    const std::string& log_text() const { return log_; }

private:
    void init(std::vector<WorldMap> maps);
    TaskSpec sample_task(int env);
    void periodic_eval();
    void append_log(const std::string& text, const char* file);

    TrainRunConfig cfg_;
    std::vector<std::shared_ptr<const WorldMap>> maps_;
    std::unique_ptr<SacAgent> agent_;
    ReplayBuffer buffer_{1, 5};  // replaced in init()
    MirrorBuffer mirror_;
    Curriculum curriculum_;
    Rng curriculum_rng_;
    Rng action_rng_;
    Rng update_rng_;
    std::vector<Rng> env_rngs_;
    std::deque<bool> recent_;
    long long episodes_ = 0;
    long long total_steps_ = 0;
    long long updates_ = 0;
    long long synthetic_ = 0;
    std::string log_;
};

/// Agent alone, for evaluation.
std::shared_ptr<SacAgent> load_agent(const std::filesystem::path& checkpoint);

/// Human-readable summary of a checkpoint file.
std::string describe_checkpoint(const std::filesystem::path& checkpoint);

// --- Checkpoint container ---

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointEntry {
    std::string name;
    bool is_text = false;
    std::string text;
    std::vector<std::uint64_t> shape;
    std::vector<double> values;
};

/// Magic, version, then named arrays (shape and row-major f64 values) and text blobs.
std::string encode_checkpoint(const std::vector<CheckpointEntry>& entries, std::uint32_t version = kCheckpointVersion);
std::vector<CheckpointEntry> decode_checkpoint(const std::string& bytes);

} // namespace maernav
