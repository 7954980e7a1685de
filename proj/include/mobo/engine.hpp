#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobo/acquisition.hpp"
#include "mobo/gp.hpp"
#include "mobo/moea.hpp"
#include "mobo/problems.hpp"

namespace mobo {

/// The three compared optimization workflows: fixed surrogates refined by a
/// genetic algorithm, and two Bayesian loops driven by scalarized EI and by
/// expected hypervolume improvement.
enum class Workflow { Optim1, Optim2, Optim3 };

std::string workflow_name(Workflow w);
Workflow workflow_from_string(const std::string& name);

/// Infill-criterion settings shared by the BO workflows.
struct AcquisitionSettings {
    int mc_samples = 4096;
    int mc_samples_final = 65536;
    int screen = 256;  // space-filling candidates scored before the descents
    int restarts = 32;
    double step_init = 0.1;
    double step_min = 1e-4;
    double temperature_scale = 1e-3;  // sigmoid temperature as a fraction of
                                      // the observed constraint spread
    double parego_alpha = 0.05;       // augmented-Chebyshev weight
};

/// Model-fitting settings shared by every surrogate.
struct GpSettings {
    double nugget = 1e-8;  // noise floor relative to the signal variance
};

/// Covariance family per modeled output. The torque analogue and the
/// constraint use Matern 5/2; the rougher power-ratio response uses the
/// exponential kernel.
struct KernelChoices {
    KernelFamily f1 = KernelFamily::Matern52;
    KernelFamily f2 = KernelFamily::Exponential;
    KernelFamily g = KernelFamily::Matern52;
};

/// Genetic-algorithm settings for the fixed-surrogate workflow.
struct MoeaSettings {
    int population = 100;
    int generations = 200;
    int verify_points = 10;  // predicted-front designs re-simulated afterwards
    double crossover_prob = 0.9;
    double crossover_eta = 15.0;
    double mutation_prob = -1.0;  // negative: defaults to 1/dim
    double mutation_eta = 20.0;
};

/// One experiment: problem binding, workflow, budgets, and seeds.
struct ExperimentConfig {
    std::string problem = "synrel-toy";
    Workflow workflow = Workflow::Optim3;
    int initial_doe_size = 250;
    int iterations = 50;
    int batch_size = 4;
    int total_budget = 450;
    std::uint64_t seed = 0;
    int refit_every = 1;    // full hyperparameter search cadence, in iterations
    int refit_evals = 160;  // refinement budget for full refits
    double reference_margin = 0.1;  // reference = worst feasible + margin * range
    AcquisitionSettings acquisition;
    GpSettings gp;
    KernelChoices kernels;
    MoeaSettings moea;

    /// ConfigError unless budgets are consistent: the BO workflows need
    /// initial_doe_size + iterations * batch_size == total_budget, the
    /// fixed-surrogate workflow spends the whole budget on its design.
    void validate() const;
};

/// One per-iteration log line: hypervolume of the feasible archive of true
/// evaluations against the frozen reference point.
struct IterationLog {
    int iteration = 0;    // 0 is the state right after the initial design
    int evaluations = 0;  // budgeted evaluations consumed so far
    double hypervolume = 0.0;
    int feasible = 0;
};

/// Fitted kernel hyperparameters per output, carried in checkpoints so a
/// resumed run warm-refits from exactly the same lengthscales.
struct ModelCheckpoint {
    bool valid = false;
    KernelSpec f1, f2, g;
};

/// Complete, serializable state of one run.
struct RunState {
    ExperimentConfig config;
    std::vector<Evaluation> evaluations;
    int iteration = 0;  // completed BO iterations
    bool reference_set = false;
    Vector2 reference = Vector2::Zero();
    std::vector<IterationLog> hv_log;
    ModelCheckpoint models;
    // fixed-surrogate outputs: predicted front and its a-posteriori checks
    Matrix front_designs;     // unit-cube designs, rows sorted by predicted f1
    Matrix front_objectives;  // predicted (f1, f2) per design
    std::vector<VerificationRecord> verification;

    /// True evaluations consumed inside the budget (verification excluded).
    int budget_spent() const;
    /// Feasible non-dominated true evaluations as (f1, f2) rows, excluding
    /// verification; pass include_verification for the a-posteriori view.
    Matrix true_front(bool include_verification = false) const;
    /// The same front with its designs: feasible non-dominated budgeted
    /// evaluations ordered by f1 ascending.
    std::vector<Evaluation> front_evaluations() const;
};

/// A run aborted mid-flight (evaluation or refit failure); carries the state
/// reached so far so it can be saved and resumed.
struct RunAborted : std::runtime_error {
    RunState state;
    RunAborted(const std::string& msg, RunState s)
        : std::runtime_error(msg), state(std::move(s)) {}
};

/// Evaluate the initial design, freeze the reference point, and log the
/// iteration-0 hypervolume. The BO loop is then bo_step per iteration.
RunState init_bo(const ExperimentConfig& config, const Problem& problem);

/// One BO iteration: (re)fit the three models, pick a batch with the
/// configured criterion, evaluate it, and log the archive hypervolume.
void bo_step(RunState& state, const Problem& problem);

/// init_bo plus config.iterations steps.
RunState run_bo(const ExperimentConfig& config, const Problem& problem);

/// Fixed-surrogate workflow: one big design, one fit, a genetic-algorithm
/// run on the frozen surrogates, and re-simulation of spread-out front
/// designs (logged outside the budget).
RunState run_fixed_surrogate(const ExperimentConfig& config, const Problem& problem);

/// Dispatch on config.workflow.
RunState run_workflow(const ExperimentConfig& config, const Problem& problem);

/// Versioned JSON checkpoint; load_state rejects unknown formats.
std::string save_state(const RunState& state);
RunState load_state(const std::string& text);

/// Per-workflow aggregate over repetitions.
struct WorkflowSummary {
    Workflow workflow = Workflow::Optim1;
    std::vector<double> final_hv;  // per repetition, common reference point
    double median_hv = 0.0;
    int wins = 0;
    std::vector<Matrix> fronts;  // per repetition: true front, minimization units
    std::vector<std::vector<IterationLog>> trajectories;  // per repetition
};

struct ComparisonReport {
    std::vector<std::uint64_t> seeds;   // one per repetition
    std::vector<Vector2> references;    // common reference per repetition
    std::vector<WorkflowSummary> workflows;
};

/// Run every config once per repetition (rep r uses seed config.seed + r)
/// on a fresh problem instance, then score all workflows against a common
/// per-repetition reference built from the union of feasible true
/// evaluations. The BO workflows are scored on their feasible archives, the
/// fixed-surrogate workflow on its re-simulated front. A fair comparison
/// needs one problem and one budget, so configs must share both.
ComparisonReport compare_workflows(const std::vector<ExperimentConfig>& configs,
                                   int repetitions,
                                   const std::function<Problem(const ExperimentConfig&)>&
                                       problem_factory = {});

}  // namespace mobo
