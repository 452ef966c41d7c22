// maer-nav command-line front end over the C API.

#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "maernav/maernav.h"

namespace {

int report(mn_status s)
{
    if (s != MN_OK)
        std::fprintf(stderr, "maer-nav: %s\n", mn_last_error());
    return static_cast<int>(s);
}

void print_and_free(char* text)
{
    if (text) {
        std::fputs(text, stdout);
        mn_string_free(text);
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mirror-augmented replay navigation workbench"};
    app.require_subcommand(1);
    app.set_version_flag("--version", mn_version());

    std::string config, out, checkpoint, map, tasks, results, buffer_path, ckpt_path;
    std::uint64_t seed = 0;
    int jobs = 1;
    bool no_mirror = false, no_curriculum = false;
    long long resume_steps = -1;
    std::string resume;

    auto* train = app.add_subcommand("train", "Train a policy");
    train->add_option("--config", config, "Training config file (key = value lines)")->required();
    train->add_option("--seed", seed, "Base random seed")->required();
    train->add_option("--out", out, "Output directory for logs and checkpoints")->required();
    train->add_flag("--no-mirror", no_mirror, "Disable mirror augmentation (raw replay ablation)");
    train->add_flag("--no-curriculum", no_curriculum, "Sample all maps uniformly from the start");

    auto* resume_cmd = app.add_subcommand("resume", "Continue training from a checkpoint");
    resume_cmd->add_option("--checkpoint", resume, "Checkpoint to resume")->required();
    resume_cmd->add_option("--steps", resume_steps, "New total step budget (default: keep)");
    resume_cmd->add_option("--out", out, "Output directory (default: the checkpoint's directory)");

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a task list");
    eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
    eval->add_option("--map", map, "Scenario file")->required();
    eval->add_option("--tasks", tasks, "Task list file")->required();
    eval->add_option("--seed", seed, "Evaluation seed")->required();
    eval->add_option("--out", out, "Output directory")->required();
    eval->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    auto* challenge = app.add_subcommand("challenge", "Run the corridor, wall and garage fixtures");
    challenge->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
    challenge->add_option("--out", out, "Output directory")->required();
    challenge->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    auto* inspect = app.add_subcommand("inspect", "Print a buffer dump or checkpoint summary");
    auto* ib = inspect->add_option("--buffer", buffer_path, "Transition dump or checkpoint whose buffer to print");
    auto* ic = inspect->add_option("--checkpoint", ckpt_path, "Checkpoint to summarize");
    ib->excludes(ic);
    inspect->require_option(1);

    auto* gen = app.add_subcommand("gen-maps", "Write the 5x5 training maps");
    gen->add_option("--out", out, "Output directory")->required();

    auto* plot = app.add_subcommand("plot", "Render trajectories or a return curve as SVG");
    plot->add_option("--results", results, "Results file from eval, or a training log")->required();
    plot->add_option("--map", map, "Scenario file the results were produced on")->required();
    plot->add_option("--out", out, "Output SVG file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "maer-nav: %s\n", e.what());
        return MN_ERR_USAGE;
    }

    if (*train)
        return report(mn_train_file(config.c_str(), seed, out.c_str(), !no_mirror, !no_curriculum));

    if (*resume_cmd) {
        mn_trainer* t = nullptr;
        mn_status s = mn_trainer_resume(resume.c_str(), resume_steps, out.empty() ? nullptr : out.c_str(), &t);
        if (s == MN_OK)
            s = mn_trainer_run(t);
        mn_trainer_free(t);
        return report(s);
    }

    if (*eval || *challenge) {
        mn_policy* p = nullptr;
        mn_status s = mn_policy_load(checkpoint.c_str(), &p);
        char* summary = nullptr;
        if (s == MN_OK)
            s = *eval ? mn_eval(p, map.c_str(), tasks.c_str(), seed, jobs, out.c_str(), &summary)
                      : mn_challenge(p, out.c_str(), jobs, &summary);
        print_and_free(summary);
        mn_policy_free(p);
        return report(s);
    }

    if (*inspect) {
        char* text = nullptr;
        const mn_status s = buffer_path.empty() ? mn_inspect_checkpoint(ckpt_path.c_str(), &text)
                                                : mn_inspect_buffer(buffer_path.c_str(), &text);
        print_and_free(text);
        return report(s);
    }

    if (*gen)
        return report(mn_gen_maps(out.c_str()));

    if (*plot)
        return report(mn_plot(results.c_str(), map.c_str(), out.c_str()));

    return MN_ERR_USAGE;
}
