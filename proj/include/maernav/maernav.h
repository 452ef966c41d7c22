#ifndef MAERNAV_H
#define MAERNAV_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MN_API __declspec(dllexport)
#else
#define MN_API __attribute__((visibility("default")))
#endif

/* Status codes double as CLI exit codes. */
typedef enum mn_status {
    MN_OK = 0,
    MN_ERR_USAGE = 2,
    MN_ERR_NOT_FOUND = 3,
    MN_ERR_CONFIG = 4,
    MN_ERR_PARSE = 5,
    MN_ERR_IO = 6,
    MN_ERR_STATE = 7,
    MN_ERR_DOMAIN = 8,
    MN_ERR_VERSION = 9,
    MN_ERR_VALIDATION = 10,
    MN_ERR_INTERNAL = 11
} mn_status;

typedef enum mn_outcome {
    MN_RUNNING = 0,
    MN_SUCCESS = 1,
    MN_CRASH = 2,
    MN_TIMEOUT = 3
} mn_outcome;

typedef struct mn_map mn_map;
typedef struct mn_env mn_env;
typedef struct mn_trainer mn_trainer;
typedef struct mn_policy mn_policy;

/* Message of the last failure on the calling thread; empty after a success. */
MN_API const char* mn_last_error(void);
MN_API const char* mn_version(void);
/* Frees strings returned through char** out-parameters. */
MN_API void mn_string_free(char* s);

/* Maps */
MN_API mn_status mn_map_load(const char* path, mn_map** out);
MN_API mn_status mn_map_parse(const char* text, mn_map** out);
MN_API void mn_map_free(mn_map* map);
MN_API mn_status mn_map_size(const mn_map* map, double* width, double* height);
MN_API mn_status mn_map_segment_count(const mn_map* map, size_t* count);
MN_API mn_status mn_map_serialize(const mn_map* map, char** text);
/* Writes the 25 training maps as env_<row>_<col>.txt into dir. */
MN_API mn_status mn_gen_maps(const char* dir);

/* Episode engine. Observations are flat: [lidar sectors..., goal_d, goal_phi, v, w]. */
MN_API mn_status mn_env_create(const mn_map* map, mn_env** out);
MN_API void mn_env_free(mn_env* env);
MN_API size_t mn_env_obs_dim(const mn_env* env);
MN_API mn_status mn_env_reset(mn_env* env, double x, double y, double theta, double goal_x, double goal_y,
                              int max_steps, double* obs, size_t obs_len);
MN_API mn_status mn_env_step(mn_env* env, double v, double w, double* obs, size_t obs_len, double* reward,
                             mn_outcome* outcome);
MN_API mn_status mn_env_pose(const mn_env* env, double* x, double* y, double* theta);

/* Training. config_text is key = value lines; out_dir may be NULL for an in-memory run. */
MN_API mn_status mn_trainer_create(const char* config_text, uint64_t seed, const char* out_dir, int mirror_enabled,
                                   int curriculum_enabled, mn_trainer** out);
/* total_steps < 0 keeps the stored budget; out_dir NULL writes next to the checkpoint. */
MN_API mn_status mn_trainer_resume(const char* checkpoint, long long total_steps, const char* out_dir,
                                   mn_trainer** out);
MN_API void mn_trainer_free(mn_trainer* t);
MN_API mn_status mn_trainer_run(mn_trainer* t);
MN_API mn_status mn_trainer_run_episode(mn_trainer* t, mn_outcome* outcome, int* steps);
MN_API mn_status mn_trainer_save(const mn_trainer* t, const char* path);
MN_API mn_status mn_trainer_counters(const mn_trainer* t, long long* episodes, long long* steps, long long* updates,
                                     size_t* buffer_size);
MN_API mn_status mn_trainer_log(const mn_trainer* t, char** text);
/* Reads the config file and runs a full training job into out_dir. */
MN_API mn_status mn_train_file(const char* config_path, uint64_t seed, const char* out_dir, int mirror_enabled,
                               int curriculum_enabled);

/* Policies */
MN_API mn_status mn_policy_load(const char* checkpoint, mn_policy** out);
MN_API mn_status mn_policy_from_trainer(const mn_trainer* t, mn_policy** out);
MN_API void mn_policy_free(mn_policy* p);
MN_API mn_status mn_policy_act(const mn_policy* p, const double* obs, size_t obs_len, double* v, double* w);

/* Evaluation. Writes results.txt, metrics.txt and traj_<task>.txt into out_dir. */
MN_API mn_status mn_eval(const mn_policy* p, const char* map_path, const char* tasks_path, uint64_t seed, int jobs,
                         const char* out_dir, char** summary);
/* Corridor, wall and garage fixtures, each run forward and reversed. */
MN_API mn_status mn_challenge(const mn_policy* p, const char* out_dir, int jobs, char** summary);

/* Inspection. Accepts a transition dump or a checkpoint for buffers. */
MN_API mn_status mn_inspect_buffer(const char* path, char** text);
MN_API mn_status mn_inspect_checkpoint(const char* path, char** text);

/* SVG plot: trajectory overlay for a results file (trajectories read next to it), or a return
   curve when given a training log. */
MN_API mn_status mn_plot(const char* results_path, const char* map_path, const char* out_file);

#ifdef __cplusplus
}
#endif

#endif
