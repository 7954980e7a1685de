#include "mobo/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mobo/artifacts.hpp"
#include "mobo/config_io.hpp"
#include "mobo/doe.hpp"
#include "mobo/engine.hpp"

namespace mobo {

namespace {

/// Every option value the three subcommands can carry. Presence is checked
/// through the parser, so zero-initialized defaults are never applied.
struct Flags {
    std::string config_path, problem, external_cmd, workflow, out, resume_path;
    int dim = 0, doe = 0, iters = 0, q = 0, repetitions = 0;
    int mc_samples = 0, restarts = 0, refit_every = 0, refit_evals = 0;
    int concurrency = 0, points = 0;
    double timeout = 0.0;
    std::uint64_t seed = 0;
};

bool given(const CLI::App* cmd, const std::string& name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

std::string output_root() {
    const char* env = std::getenv("MOBO_OUT_DIR");
    return env != nullptr && *env != '\0' ? env : ".";
}

/// Experiment file from --config merged with command-line overrides.
/// Changing the run shape (workflow, design size, iterations, batch size)
/// recomputes the total budget from the identity the workflow requires.
ExperimentFile gather(const CLI::App* cmd, const Flags& f) {
    ExperimentFile file;
    if (given(cmd, "--config")) file = load_config(f.config_path);
    if (given(cmd, "--problem")) file.config.problem = f.problem;
    if (given(cmd, "--external-cmd")) file.external.command = f.external_cmd;
    if (given(cmd, "--dim")) file.external.dimension = f.dim;
    if (given(cmd, "--timeout")) file.external.timeout_seconds = f.timeout;
    if (given(cmd, "--concurrency")) file.external.max_concurrency = f.concurrency;
    if (given(cmd, "--workflow")) file.config.workflow = workflow_from_string(f.workflow);
    if (given(cmd, "--doe")) file.config.initial_doe_size = f.doe;
    if (given(cmd, "--iters")) file.config.iterations = f.iters;
    if (given(cmd, "--q")) file.config.batch_size = f.q;
    if (given(cmd, "--workflow") || given(cmd, "--doe") || given(cmd, "--iters") ||
        given(cmd, "--q")) {
        ExperimentConfig& c = file.config;
        c.total_budget = c.workflow == Workflow::Optim1
                             ? c.initial_doe_size
                             : c.initial_doe_size + c.iterations * c.batch_size;
    }
    if (given(cmd, "--seed")) file.config.seed = f.seed;
    if (given(cmd, "--mc-samples")) file.config.acquisition.mc_samples = f.mc_samples;
    if (given(cmd, "--restarts")) file.config.acquisition.restarts = f.restarts;
    if (given(cmd, "--refit-every")) file.config.refit_every = f.refit_every;
    if (given(cmd, "--refit-evals")) file.config.refit_evals = f.refit_evals;
    if (given(cmd, "--repetitions")) file.repetitions = f.repetitions;
    return file;
}

std::string run_directory(const CLI::App* cmd, const Flags& f, const ExperimentFile& file,
                          const std::string& problem_name) {
    if (given(cmd, "--out")) return f.out;
    return output_root() + "/mobo-run-" + problem_name + "-" +
           workflow_name(file.config.workflow) + "-seed" + std::to_string(file.config.seed);
}

void write_run_artifacts(const RunState& state, const Problem& problem,
                         const ExperimentFile& file, const std::string& dir) {
    std::uint64_t hash = config_hash(file);
    write_text_file(dir + "/config.txt",
                    artifact_header(hash, state.config.seed) + "\n" + canonical_config(file));
    write_text_file(dir + "/evaluations.csv", evaluations_csv(state, problem, hash));
    write_text_file(dir + "/front.csv", front_csv(state, problem, hash));
    write_text_file(dir + "/trajectory.csv", trajectory_csv(state, hash));
    if (state.config.workflow == Workflow::Optim1)
        write_text_file(dir + "/verification.csv", verification_csv(state, problem, hash));
    write_text_file(dir + "/summary.txt", summary_text(state, problem, hash));
    write_text_file(dir + "/state.json", save_state(state));
}

int abort_to_disk(const RunAborted& aborted, const std::string& dir) {
    const std::string path = dir + "/state.json";
    write_text_file(path, save_state(aborted.state));
    std::cerr << "error: " << aborted.what() << "\n";
    std::cerr << "state saved to " << path << "\n";
    return 1;
}

int cmd_run(const CLI::App* cmd, const Flags& f) {
    if (given(cmd, "--resume")) {
        RunState state = load_state(read_text_file(f.resume_path));
        if (state.config.workflow == Workflow::Optim1)
            throw ConfigError("the fixed-surrogate workflow runs in one pass; rerun it");
        ExperimentFile file;
        file.config = state.config;
        if (given(cmd, "--external-cmd")) file.external.command = f.external_cmd;
        if (given(cmd, "--dim")) file.external.dimension = f.dim;
        if (given(cmd, "--timeout")) file.external.timeout_seconds = f.timeout;
        if (given(cmd, "--concurrency")) file.external.max_concurrency = f.concurrency;
        file.validate();
        Problem problem = file.bind_problem();
        std::string dir = run_directory(cmd, f, file, problem.name());
        try {
            while (state.iteration < state.config.iterations) bo_step(state, problem);
        } catch (const RunAborted& aborted) {
            return abort_to_disk(aborted, dir);
        }
        write_run_artifacts(state, problem, file, dir);
        std::cout << summary_text(state, problem, config_hash(file));
        std::cout << "artifacts: " << dir << "\n";
        return 0;
    }
    ExperimentFile file = gather(cmd, f);
    file.validate();
    Problem problem = file.bind_problem();
    std::string dir = run_directory(cmd, f, file, problem.name());
    RunState state;
    try {
        state = run_workflow(file.config, problem);
    } catch (const RunAborted& aborted) {
        return abort_to_disk(aborted, dir);
    }
    write_run_artifacts(state, problem, file, dir);
    std::cout << summary_text(state, problem, config_hash(file));
    std::cout << "artifacts: " << dir << "\n";
    return 0;
}

int cmd_compare(const CLI::App* cmd, const Flags& f) {
    ExperimentFile file = gather(cmd, f);
    ExperimentConfig base = file.config;
    // The three workflows compared on one budget: the Bayesian schedule
    // decides it, the fixed-surrogate leg spends it all on its design.
    int budget = base.initial_doe_size + base.iterations * base.batch_size;
    std::vector<ExperimentConfig> legs(3, base);
    legs[0].workflow = Workflow::Optim1;
    legs[0].initial_doe_size = budget;
    legs[1].workflow = Workflow::Optim2;
    legs[2].workflow = Workflow::Optim3;
    for (ExperimentConfig& leg : legs) {
        leg.total_budget = budget;
        ExperimentFile check = file;
        check.config = leg;
        check.validate();
    }
    auto factory = [&file](const ExperimentConfig& cfg) {
        ExperimentFile bound = file;
        bound.config = cfg;
        return bound.bind_problem();
    };
    ComparisonReport report = compare_workflows(legs, file.repetitions, factory);

    std::string problem_name = factory(legs[0]).name();
    std::string dir = given(cmd, "--out") ? f.out
                                          : output_root() + "/mobo-compare-" + problem_name +
                                                "-seed" + std::to_string(base.seed);
    std::uint64_t hash = config_hash(file);
    write_text_file(dir + "/config.txt",
                    artifact_header(hash, base.seed) + "\n" + canonical_config(file));
    write_text_file(dir + "/summary.csv", comparison_summary_csv(report, hash));
    write_text_file(dir + "/runs.csv", comparison_runs_csv(report, hash));
    for (std::size_t w = 0; w < report.workflows.size(); ++w) {
        std::string tag = workflow_name(report.workflows[w].workflow);
        write_text_file(dir + "/front_" + tag + ".csv", comparison_front_csv(report, w, hash));
        write_text_file(dir + "/trajectory_" + tag + ".csv",
                        comparison_trajectory_csv(report, w, hash));
    }
    for (const WorkflowSummary& w : report.workflows) {
        std::cout << workflow_name(w.workflow) << ": median final hypervolume "
                  << format_double(w.median_hv) << ", wins " << w.wins << "/"
                  << file.repetitions << "\n";
    }
    std::cout << "artifacts: " << dir << "\n";
    return 0;
}

int cmd_doe(const CLI::App* cmd, const Flags& f) {
    int dim = f.dim;
    std::vector<std::string> names;
    if (given(cmd, "--problem")) {
        Problem problem = make_problem(f.problem);
        if (given(cmd, "--dim") && f.dim != problem.dimension())
            throw ConfigError("--dim disagrees with the problem's dimension");
        dim = problem.dimension();
        for (const VariableSpec& v : problem.variables()) names.push_back("u_" + v.name);
    } else {
        if (!given(cmd, "--dim")) throw ConfigError("doe needs --dim or --problem");
        for (int j = 1; j <= dim; ++j) names.push_back("u_x" + std::to_string(j));
    }
    Design design = lhs_maximin(f.points, dim, f.seed);
    std::string out;
    out += "# seed=" + std::to_string(f.seed) + "\n";
    for (std::size_t j = 0; j < names.size(); ++j)
        out += (j > 0 ? "," : "") + csv_field(names[j]);
    out += "\n";
    for (int i = 0; i < design.points.rows(); ++i) {
        for (int j = 0; j < design.points.cols(); ++j)
            out += (j > 0 ? "," : "") + format_double(design.points(i, j));
        out += "\n";
    }
    std::string path = given(cmd, "--out") ? f.out
                                           : output_root() + "/mobo-doe-n" +
                                                 std::to_string(f.points) + "-d" +
                                                 std::to_string(dim) + "-seed" +
                                                 std::to_string(f.seed) + ".csv";
    write_text_file(path, out);
    std::cout << "maximin_distance = " << format_double(design.maximin_distance) << "\n";
    std::cout << "design: " << path << "\n";
    return 0;
}

void add_binding_options(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config_path, "experiment file to start from");
    cmd->add_option("--problem", f.problem, "built-in problem name");
    cmd->add_option("--external-cmd", f.external_cmd, "external simulator command");
    cmd->add_option("--dim", f.dim, "design dimension of the external simulator");
    cmd->add_option("--timeout", f.timeout, "external evaluation timeout in seconds");
    cmd->add_option("--concurrency", f.concurrency, "max concurrent external evaluations");
}

void add_schedule_options(CLI::App* cmd, Flags& f) {
    cmd->add_option("--doe", f.doe, "initial design size");
    cmd->add_option("--iters", f.iters, "optimization iterations");
    cmd->add_option("--q", f.q, "evaluations per iteration");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("--mc-samples", f.mc_samples, "Monte Carlo samples per acquisition value");
    cmd->add_option("--restarts", f.restarts, "acquisition search restarts");
    cmd->add_option("--refit-every", f.refit_every, "full hyperparameter refit cadence");
    cmd->add_option("--refit-evals", f.refit_evals, "refinement budget per full refit");
    cmd->add_option("--out", f.out, "output directory");
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Constrained two-objective optimization workflows over expensive simulators"};
    app.require_subcommand(1);
    Flags f;

    CLI::App* run = app.add_subcommand("run", "run one workflow and write its artifacts");
    add_binding_options(run, f);
    run->add_option("--workflow", f.workflow, "optim1, optim2, or optim3");
    add_schedule_options(run, f);
    CLI::Option* resume = run->add_option("--resume", f.resume_path,
                                          "continue from a saved state.json");
    for (const char* name : {"--config", "--problem", "--workflow", "--doe", "--iters", "--q",
                             "--seed", "--mc-samples", "--restarts", "--refit-every",
                             "--refit-evals"})
        resume->excludes(run->get_option(name));

    CLI::App* compare = app.add_subcommand(
        "compare", "run all three workflows repeatedly and score them together");
    add_binding_options(compare, f);
    add_schedule_options(compare, f);
    compare->add_option("--repetitions", f.repetitions, "independent repetitions per workflow");

    CLI::App* doe = app.add_subcommand("doe", "write a space-filling design");
    doe->add_option("-n,--points", f.points, "number of design points")->required();
    doe->add_option("-d,--dim", f.dim, "design dimension");
    doe->add_option("--seed", f.seed, "random seed");
    doe->add_option("--problem", f.problem, "built-in problem supplying names and dimension");
    doe->add_option("--out", f.out, "output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& help) {
        return app.exit(help);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return 2;
    }

    try {
        if (run->parsed()) return cmd_run(run, f);
        if (compare->parsed()) return cmd_compare(compare, f);
        return cmd_doe(doe, f);
    } catch (const ConfigError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const InputError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}

}  // namespace mobo
