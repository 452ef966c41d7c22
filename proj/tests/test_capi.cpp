#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "maernav/maernav.h"

namespace fs = std::filesystem;

namespace {

std::string fixture(const char* name)
{
    return std::string(MAERNAV_FIXTURES) + "/" + name;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string tiny_config_text()
{
    std::string text = slurp(fixture("tiny.cfg"));
    const auto at = text.find("maps = room6.txt");
    text.replace(at, std::strlen("maps = room6.txt"), "maps = " + fixture("room6.txt"));
    return text;
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("maernav_capi_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST_SUITE("capi") {

TEST_CASE("maps")
{
    mn_map* map = nullptr;
    REQUIRE(mn_map_load(fixture("five_segments.txt").c_str(), &map) == MN_OK);
    double w = 0, h = 0;
    CHECK(mn_map_size(map, &w, &h) == MN_OK);
    CHECK(w == 10.0);
    CHECK(h == 8.0);
    size_t n = 0;
    CHECK(mn_map_segment_count(map, &n) == MN_OK);
    CHECK(n == 9);
    char* text = nullptr;
    CHECK(mn_map_serialize(map, &text) == MN_OK);
    CHECK(std::string(text).find("five_walls") != std::string::npos);
    mn_string_free(text);
    mn_map_free(map);

    mn_map* bad = nullptr;
    CHECK(mn_map_load("/nonexistent/map.txt", &bad) == MN_ERR_NOT_FOUND);
    CHECK(bad == nullptr);
    CHECK(std::strlen(mn_last_error()) > 0);
    CHECK(mn_map_parse("size 8 8\nsegment 1 1\n", &bad) == MN_ERR_PARSE);
    CHECK(mn_map_parse("size 8 8\nsegment 1 1 9 1\n", &bad) == MN_ERR_VALIDATION);
    CHECK(mn_map_parse(nullptr, &bad) == MN_ERR_USAGE);
}

TEST_CASE("environment stepping")
{
    mn_map* map = nullptr;
    REQUIRE(mn_map_parse("size 8 8\n", &map) == MN_OK);
    mn_env* env = nullptr;
    REQUIRE(mn_env_create(map, &env) == MN_OK);
    const size_t dim = mn_env_obs_dim(env);
    CHECK(dim == 40);
    std::vector<double> obs(dim);
    REQUIRE(mn_env_reset(env, 2, 4, 0, 3, 4, 400, obs.data(), obs.size()) == MN_OK);
    CHECK(obs[36] == doctest::Approx(1.0));
    double reward = 0;
    mn_outcome outcome = MN_RUNNING;
    int steps = 0;
    while (outcome == MN_RUNNING) {
        REQUIRE(mn_env_step(env, 0.5, 0, obs.data(), obs.size(), &reward, &outcome) == MN_OK);
        ++steps;
    }
    CHECK(outcome == MN_SUCCESS);
    CHECK(reward == 10.0);
    CHECK(steps == 17);
    CHECK(mn_env_step(env, 0.5, 0, obs.data(), obs.size(), &reward, &outcome) == MN_ERR_STATE);
    double x = 0, y = 0, th = 0;
    CHECK(mn_env_pose(env, &x, &y, &th) == MN_OK);
    CHECK(x == doctest::Approx(2.85));

    CHECK(mn_env_reset(env, 0.1, 0.1, 0, 3, 4, 400, obs.data(), obs.size()) == MN_ERR_VALIDATION);
    CHECK(mn_env_reset(env, 2, 4, 0, 3, 4, 400, obs.data(), 3) == MN_ERR_USAGE);
    mn_env_free(env);
    mn_map_free(map);
}

TEST_CASE("training, checkpoints and policies")
{
    const fs::path dir = scratch("train");
    mn_trainer* t = nullptr;
    REQUIRE(mn_trainer_create(tiny_config_text().c_str(), 3, dir.string().c_str(), 1, 1, &t) == MN_OK);
    mn_outcome o = MN_RUNNING;
    int steps = 0;
    CHECK(mn_trainer_run_episode(t, &o, &steps) == MN_OK);
    CHECK(o != MN_RUNNING);
    CHECK(steps > 0);
    CHECK(mn_trainer_run(t) == MN_OK);
    long long episodes = 0, total = 0, updates = 0;
    size_t buffer = 0;
    CHECK(mn_trainer_counters(t, &episodes, &total, &updates, &buffer) == MN_OK);
    CHECK(total >= 400);
    CHECK(updates == total - 150);
    CHECK(buffer >= static_cast<size_t>(total));
    char* log = nullptr;
    CHECK(mn_trainer_log(t, &log) == MN_OK);
    CHECK(std::string(log).rfind("# episode", 0) == 0);
    mn_string_free(log);

    mn_policy* p = nullptr;
    CHECK(mn_policy_from_trainer(t, &p) == MN_OK);
    std::vector<double> obs(40, 1.0);
    double v = 0, w = 0;
    CHECK(mn_policy_act(p, obs.data(), obs.size(), &v, &w) == MN_OK);
    CHECK(std::abs(v) <= 0.5);
    CHECK(mn_policy_act(p, obs.data(), 5, &v, &w) == MN_ERR_USAGE);
    mn_policy_free(p);
    mn_trainer_free(t);

    const std::string ckpt = (dir / "checkpoint.bin").string();
    REQUIRE(mn_policy_load(ckpt.c_str(), &p) == MN_OK);
    char* summary = nullptr;
    const fs::path ev = dir / "eval";
    CHECK(mn_eval(p, fixture("room6.txt").c_str(), fixture("tasks3.txt").c_str(), 1, 2, ev.string().c_str(),
                  &summary) == MN_OK);
    CHECK(summary != nullptr);
    mn_string_free(summary);
    CHECK(fs::exists(ev / "results.txt"));
    CHECK(fs::exists(ev / "metrics.txt"));
    CHECK(fs::exists(ev / "traj_0.txt"));
    const fs::path svg = dir / "plot.svg";
    CHECK(mn_plot((ev / "results.txt").string().c_str(), fixture("room6.txt").c_str(), svg.string().c_str()) == MN_OK);
    CHECK(slurp(svg).find("</svg>") != std::string::npos);

    const fs::path ch = dir / "challenge";
    CHECK(mn_challenge(p, ch.string().c_str(), 2, &summary) == MN_OK);
    mn_string_free(summary);
    for (const char* name : {"corridor", "wall", "garage"})
        CHECK(fs::exists(ch / name / "map.txt"));
    mn_policy_free(p);

    char* text = nullptr;
    CHECK(mn_inspect_checkpoint(ckpt.c_str(), &text) == MN_OK);
    mn_string_free(text);
    CHECK(mn_inspect_buffer(ckpt.c_str(), &text) == MN_OK);
    CHECK(std::string(text).find("# maer-nav transitions v1") != std::string::npos);
    mn_string_free(text);

    // Resume with a larger budget continues the counters.
    REQUIRE(mn_trainer_resume(ckpt.c_str(), 600, nullptr, &t) == MN_OK);
    CHECK(mn_trainer_run(t) == MN_OK);
    CHECK(mn_trainer_counters(t, &episodes, &total, &updates, &buffer) == MN_OK);
    CHECK(total >= 600);
    mn_trainer_free(t);
    fs::remove_all(dir);
}

TEST_CASE("error codes for bad inputs")
{
    mn_trainer* t = nullptr;
    CHECK(mn_trainer_create("bogus = 1\n", 0, nullptr, 1, 1, &t) == MN_ERR_CONFIG);
    CHECK(std::string(mn_last_error()).find("line 1") != std::string::npos);
    CHECK(mn_trainer_resume("/nonexistent/ckpt.bin", -1, nullptr, &t) == MN_ERR_NOT_FOUND);
    mn_policy* p = nullptr;
    CHECK(mn_policy_load("/nonexistent/ckpt.bin", &p) == MN_ERR_NOT_FOUND);
    const fs::path junk = scratch("junk.bin");
    std::ofstream(junk) << "junk";
    CHECK(mn_policy_load(junk.string().c_str(), &p) == MN_ERR_PARSE);
    fs::remove(junk);
    char* text = nullptr;
    CHECK(mn_inspect_buffer("/nonexistent/dump.txt", &text) == MN_ERR_NOT_FOUND);
    CHECK(mn_train_file("/nonexistent/cfg", 0, "/tmp/x", 1, 1) == MN_ERR_NOT_FOUND);
    CHECK(std::string(mn_version()).size() > 0);
}

}
