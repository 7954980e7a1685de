#include "mobo/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mobo/doe.hpp"
#include "mobo/kernel.hpp"
#include "mobo/pareto.hpp"
#include "mobo/rng.hpp"

namespace mobo {

namespace {

using nlohmann::json;

std::vector<Vector2> feasible_pairs(const std::vector<Evaluation>& evaluations,
                                    bool include_verification) {
    std::vector<Vector2> pairs;
    for (const Evaluation& e : evaluations) {
        if (!include_verification && e.source == EvalSource::Verification) continue;
        if (e.g <= 0.0) pairs.emplace_back(e.f1, e.f2);
    }
    return pairs;
}

/// Non-dominated subset sorted by f1 ascending (f2 breaks ties), as rows.
Matrix front_matrix(const std::vector<Vector2>& points) {
    std::vector<Vector2> front;
    for (int i : non_dominated_filter(points)) front.push_back(points[i]);
    std::sort(front.begin(), front.end(), [](const Vector2& a, const Vector2& b) {
        return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
    });
    Matrix rows(static_cast<int>(front.size()), 2);
    for (std::size_t i = 0; i < front.size(); ++i) rows.row(static_cast<int>(i)) = front[i];
    return rows;
}

double front_hypervolume(const std::vector<Vector2>& points, const Vector2& reference) {
    if (points.empty()) return 0.0;
    std::vector<Vector2> front;
    for (int i : non_dominated_filter(points)) front.push_back(points[i]);
    return hypervolume_2d(front, reference);
}

/// Worst feasible objective plus a margin of the observed range per
/// component. Falls back to all evaluations when nothing is feasible, and to
/// a magnitude-based pad when the observed range is degenerate.
Vector2 freeze_reference(const std::vector<Evaluation>& evaluations, double margin) {
    std::vector<Vector2> pool = feasible_pairs(evaluations, true);
    if (pool.empty()) {
        for (const Evaluation& e : evaluations) pool.emplace_back(e.f1, e.f2);
    }
    if (pool.empty()) throw InputError("reference point needs at least one evaluation");
    Vector2 lo = pool.front(), hi = pool.front();
    for (const Vector2& p : pool) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    Vector2 reference;
    for (int c = 0; c < 2; ++c) {
        double range = hi[c] - lo[c];
        double pad = margin * (range > 0.0 ? range : std::max(1.0, std::abs(hi[c])));
        reference[c] = hi[c] + pad;
    }
    return reference;
}

void log_hypervolume(RunState& state, int iteration) {
    std::vector<Vector2> pairs = feasible_pairs(state.evaluations, false);
    IterationLog entry;
    entry.iteration = iteration;
    entry.evaluations = state.budget_spent();
    entry.feasible = static_cast<int>(pairs.size());
    entry.hypervolume = front_hypervolume(pairs, state.reference);
    state.hv_log.push_back(entry);
}

struct TrainingData {
    Matrix X;
    Vector f1, f2, g;
};

/// All budgeted evaluations stacked into fit-ready arrays.
TrainingData training_data(const std::vector<Evaluation>& evaluations, int dim) {
    int n = 0;
    for (const Evaluation& e : evaluations)
        if (e.source != EvalSource::Verification) ++n;
    TrainingData data{Matrix(n, dim), Vector(n), Vector(n), Vector(n)};
    int r = 0;
    for (const Evaluation& e : evaluations) {
        if (e.source == EvalSource::Verification) continue;
        data.X.row(r) = e.x.transpose();
        data.f1[r] = e.f1;
        data.f2[r] = e.f2;
        data.g[r] = e.g;
        ++r;
    }
    return data;
}

/// Fit or warm-refit the three models and refresh the checkpoint.
struct Models {
    GaussianProcessModel f1, f2, g;
};

Models fit_models(RunState& state, const TrainingData& data, bool full) {
    const ExperimentConfig& cfg = state.config;
    FitOptions opt;
    opt.nugget = cfg.gp.nugget;
    opt.refine_evals = cfg.refit_evals;
    auto one = [&](const Vector& y, KernelFamily family, const KernelSpec& checkpoint) {
        if (full) return GaussianProcessModel::fit(data.X, y, family, opt);
        return GaussianProcessModel::fit_profiled(data.X, y, family, checkpoint.lengthscales, opt);
    };
    Models m{one(data.f1, cfg.kernels.f1, state.models.f1),
             one(data.f2, cfg.kernels.f2, state.models.f2),
             one(data.g, cfg.kernels.g, state.models.g)};
    state.models.valid = true;
    state.models.f1 = m.f1.kernel();
    state.models.f2 = m.f2.kernel();
    state.models.g = m.g.kernel();
    return m;
}

json vector_to_json(const Vector& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Vector vector_from_json(const json& a) {
    Vector v(static_cast<int>(a.size()));
    for (int i = 0; i < v.size(); ++i) v[i] = a.at(i).get<double>();
    return v;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows) {
    int n = static_cast<int>(rows.size());
    int d = n > 0 ? static_cast<int>(rows.at(0).size()) : 0;
    Matrix m(n, d);
    for (int r = 0; r < n; ++r) {
        const json& row = rows.at(r);
        if (static_cast<int>(row.size()) != d)
            throw ConfigError("run state: ragged matrix rows");
        for (int c = 0; c < d; ++c) m(r, c) = row.at(c).get<double>();
    }
    return m;
}

json spec_to_json(const KernelSpec& spec) {
    return json{{"family", to_string(spec.family)},
                {"lengthscales", vector_to_json(spec.lengthscales)},
                {"signal_variance", spec.signal_variance},
                {"noise_variance", spec.noise_variance}};
}

KernelSpec spec_from_json(const json& j) {
    KernelSpec spec;
    spec.family = kernel_family_from_string(j.at("family").get<std::string>());
    spec.lengthscales = vector_from_json(j.at("lengthscales"));
    spec.signal_variance = j.at("signal_variance").get<double>();
    spec.noise_variance = j.at("noise_variance").get<double>();
    return spec;
}

json config_to_json(const ExperimentConfig& c) {
    return json{{"problem", c.problem},
                {"workflow", workflow_name(c.workflow)},
                {"initial_doe_size", c.initial_doe_size},
                {"iterations", c.iterations},
                {"batch_size", c.batch_size},
                {"total_budget", c.total_budget},
                {"seed", c.seed},
                {"refit_every", c.refit_every},
                {"refit_evals", c.refit_evals},
                {"reference_margin", c.reference_margin},
                {"acquisition",
                 json{{"mc_samples", c.acquisition.mc_samples},
                      {"mc_samples_final", c.acquisition.mc_samples_final},
                      {"screen", c.acquisition.screen},
                      {"restarts", c.acquisition.restarts},
                      {"step_init", c.acquisition.step_init},
                      {"step_min", c.acquisition.step_min},
                      {"temperature_scale", c.acquisition.temperature_scale},
                      {"parego_alpha", c.acquisition.parego_alpha}}},
                {"gp", json{{"nugget", c.gp.nugget}}},
                {"kernels",
                 json{{"f1", to_string(c.kernels.f1)},
                      {"f2", to_string(c.kernels.f2)},
                      {"g", to_string(c.kernels.g)}}},
                {"moea",
                 json{{"population", c.moea.population},
                      {"generations", c.moea.generations},
                      {"verify_points", c.moea.verify_points},
                      {"crossover_prob", c.moea.crossover_prob},
                      {"crossover_eta", c.moea.crossover_eta},
                      {"mutation_prob", c.moea.mutation_prob},
                      {"mutation_eta", c.moea.mutation_eta}}}};
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    c.problem = j.at("problem").get<std::string>();
    c.workflow = workflow_from_string(j.at("workflow").get<std::string>());
    c.initial_doe_size = j.at("initial_doe_size").get<int>();
    c.iterations = j.at("iterations").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.total_budget = j.at("total_budget").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.refit_every = j.at("refit_every").get<int>();
    c.refit_evals = j.at("refit_evals").get<int>();
    c.reference_margin = j.at("reference_margin").get<double>();
    const json& a = j.at("acquisition");
    c.acquisition.mc_samples = a.at("mc_samples").get<int>();
    c.acquisition.mc_samples_final = a.at("mc_samples_final").get<int>();
    c.acquisition.screen = a.at("screen").get<int>();
    c.acquisition.restarts = a.at("restarts").get<int>();
    c.acquisition.step_init = a.at("step_init").get<double>();
    c.acquisition.step_min = a.at("step_min").get<double>();
    c.acquisition.temperature_scale = a.at("temperature_scale").get<double>();
    c.acquisition.parego_alpha = a.at("parego_alpha").get<double>();
    c.gp.nugget = j.at("gp").at("nugget").get<double>();
    const json& k = j.at("kernels");
    c.kernels.f1 = kernel_family_from_string(k.at("f1").get<std::string>());
    c.kernels.f2 = kernel_family_from_string(k.at("f2").get<std::string>());
    c.kernels.g = kernel_family_from_string(k.at("g").get<std::string>());
    const json& m = j.at("moea");
    c.moea.population = m.at("population").get<int>();
    c.moea.generations = m.at("generations").get<int>();
    c.moea.verify_points = m.at("verify_points").get<int>();
    c.moea.crossover_prob = m.at("crossover_prob").get<double>();
    c.moea.crossover_eta = m.at("crossover_eta").get<double>();
    c.moea.mutation_prob = m.at("mutation_prob").get<double>();
    c.moea.mutation_eta = m.at("mutation_eta").get<double>();
    return c;
}

double median_of(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// The front a workflow is scored on: the re-simulated feasible designs for
/// the fixed-surrogate path, the archive of budgeted evaluations otherwise.
std::vector<Vector2> scoring_front(const RunState& state) {
    if (state.config.workflow == Workflow::Optim1) {
        std::vector<Vector2> pairs;
        for (const Evaluation& e : state.evaluations)
            if (e.source == EvalSource::Verification && e.g <= 0.0) pairs.emplace_back(e.f1, e.f2);
        return pairs;
    }
    return feasible_pairs(state.evaluations, false);
}

}  // namespace

std::string workflow_name(Workflow w) {
    switch (w) {
        case Workflow::Optim1: return "optim1";
        case Workflow::Optim2: return "optim2";
        case Workflow::Optim3: return "optim3";
    }
    throw InputError("unknown workflow");
}

Workflow workflow_from_string(const std::string& name) {
    if (name == "optim1") return Workflow::Optim1;
    if (name == "optim2") return Workflow::Optim2;
    if (name == "optim3") return Workflow::Optim3;
    throw ConfigError("unknown workflow \"" + name + "\" (expected optim1, optim2, or optim3)");
}

void ExperimentConfig::validate() const {
    if (problem.empty()) throw ConfigError("config: problem name is empty");
    if (initial_doe_size < 2) throw ConfigError("config: initial design needs at least 2 points");
    if (iterations < 0) throw ConfigError("config: iterations must be non-negative");
    if (batch_size < 1) throw ConfigError("config: batch size must be at least 1");
    if (refit_every < 1) throw ConfigError("config: refit cadence must be at least 1");
    if (refit_evals < 0) throw ConfigError("config: refit evaluation budget must be non-negative");
    if (!(reference_margin > 0.0)) throw ConfigError("config: reference margin must be positive");
    if (acquisition.mc_samples < 1 || acquisition.mc_samples_final < 1)
        throw ConfigError("config: Monte-Carlo sample counts must be positive");
    if (acquisition.screen < 1) throw ConfigError("config: acquisition screen size must be at least 1");
    if (acquisition.restarts < 1) throw ConfigError("config: acquisition restarts must be at least 1");
    if (!(acquisition.step_init > 0.0) || !(acquisition.step_min > 0.0) ||
        acquisition.step_min > acquisition.step_init)
        throw ConfigError("config: search steps must be positive with step_min <= step_init");
    if (!(acquisition.temperature_scale > 0.0))
        throw ConfigError("config: temperature scale must be positive");
    if (!(acquisition.parego_alpha > 0.0))
        throw ConfigError("config: the scalarization weight alpha must be positive");
    if (!(gp.nugget >= 0.0)) throw ConfigError("config: the nugget must be non-negative");
    if (moea.population < 4 || moea.population % 2 != 0)
        throw ConfigError("config: population must be even and at least 4");
    if (moea.generations < 1) throw ConfigError("config: generations must be at least 1");
    if (moea.verify_points < 0)
        throw ConfigError("config: verification point count must be non-negative");
    if (!(moea.crossover_prob >= 0.0 && moea.crossover_prob <= 1.0))
        throw ConfigError("config: crossover probability must lie in [0,1]");
    if (moea.mutation_prob > 1.0)
        throw ConfigError("config: mutation probability must be at most 1 (negative picks 1/d)");
    if (!(moea.crossover_eta > 0.0) || !(moea.mutation_eta > 0.0))
        throw ConfigError("config: distribution indices must be positive");
    if (workflow == Workflow::Optim1) {
        if (initial_doe_size != total_budget)
            throw ConfigError(
                "config: the fixed-surrogate workflow spends the whole budget on its design "
                "(initial_doe_size must equal total_budget)");
    } else if (initial_doe_size + iterations * batch_size != total_budget) {
        throw ConfigError(
            "config: initial design plus iteration batches must equal the total budget");
    }
}

int RunState::budget_spent() const {
    int n = 0;
    for (const Evaluation& e : evaluations)
        if (e.source != EvalSource::Verification) ++n;
    return n;
}

Matrix RunState::true_front(bool include_verification) const {
    return front_matrix(feasible_pairs(evaluations, include_verification));
}

std::vector<Evaluation> RunState::front_evaluations() const {
    std::vector<Evaluation> pool;
    std::vector<Vector2> pairs;
    for (const Evaluation& e : evaluations) {
        if (e.source == EvalSource::Verification || e.g > 0.0) continue;
        pool.push_back(e);
        pairs.emplace_back(e.f1, e.f2);
    }
    std::vector<Evaluation> front;
    for (int i : non_dominated_filter(pairs)) front.push_back(pool[i]);
    std::sort(front.begin(), front.end(), [](const Evaluation& a, const Evaluation& b) {
        return a.f1 != b.f1 ? a.f1 < b.f1 : a.f2 < b.f2;
    });
    return front;
}

RunState init_bo(const ExperimentConfig& config, const Problem& problem) {
    config.validate();
    if (config.workflow == Workflow::Optim1)
        throw InputError("init_bo drives the Bayesian workflows; use run_fixed_surrogate");
    RunState state;
    state.config = config;
    Design doe =
        lhs_maximin(config.initial_doe_size, problem.dimension(), stream_seed(config.seed, "doe"));
    try {
        state.evaluations = problem.evaluate_batch(doe.points, EvalSource::Doe, 0);
    } catch (const EvaluationError& err) {
        throw RunAborted(std::string("run aborted during the initial design: ") + err.what(),
                         std::move(state));
    }
    state.reference = freeze_reference(state.evaluations, config.reference_margin);
    state.reference_set = true;
    log_hypervolume(state, 0);
    return state;
}

void bo_step(RunState& state, const Problem& problem) {
    const ExperimentConfig& cfg = state.config;
    if (cfg.workflow == Workflow::Optim1)
        throw InputError("bo_step drives the Bayesian workflows; use run_fixed_surrogate");
    if (!state.reference_set) throw InputError("bo_step needs a state produced by init_bo");
    const int k = state.iteration + 1;
    try {
        TrainingData data = training_data(state.evaluations, problem.dimension());
        const bool full = !state.models.valid || (k - 1) % cfg.refit_every == 0;
        Models models = fit_models(state, data, full);

        AcquisitionContext ctx;
        ctx.model_f1 = &models.f1;
        ctx.model_f2 = &models.f2;
        ctx.model_g = &models.g;
        ctx.observed_objectives = Matrix(data.f1.size(), 2);
        ctx.observed_objectives.col(0) = data.f1;
        ctx.observed_objectives.col(1) = data.f2;
        std::vector<Vector2> feasible = feasible_pairs(state.evaluations, false);
        ctx.feasible_objectives = Matrix(static_cast<int>(feasible.size()), 2);
        for (std::size_t i = 0; i < feasible.size(); ++i)
            ctx.feasible_objectives.row(static_cast<int>(i)) = feasible[i];
        for (int i : non_dominated_filter(feasible)) ctx.front.push_back(feasible[i]);
        ctx.reference = state.reference;
        ctx.mc_samples = cfg.acquisition.mc_samples;
        ctx.mc_samples_final = cfg.acquisition.mc_samples_final;
        double spread = data.g.maxCoeff() - data.g.minCoeff();
        ctx.sigmoid_temperature =
            cfg.acquisition.temperature_scale *
            (spread > 0.0 ? spread : std::max(1.0, std::abs(data.g[0])));
        ctx.parego_alpha = cfg.acquisition.parego_alpha;
        ctx.inner.screen = cfg.acquisition.screen;
        ctx.inner.restarts = cfg.acquisition.restarts;
        ctx.inner.step_init = cfg.acquisition.step_init;
        ctx.inner.step_min = cfg.acquisition.step_min;

        std::uint64_t acq_seed = stream_seed(cfg.seed, "acq-" + std::to_string(k));
        BatchSelection selection = cfg.workflow == Workflow::Optim2
                                       ? qparego_select(ctx, cfg.batch_size, acq_seed)
                                       : qehvi_select(ctx, cfg.batch_size, acq_seed);

        std::vector<Evaluation> batch =
            problem.evaluate_batch(selection.points, EvalSource::BoIteration, k);
        state.evaluations.insert(state.evaluations.end(), batch.begin(), batch.end());
        state.iteration = k;
        log_hypervolume(state, k);
    } catch (const EvaluationError& err) {
        throw RunAborted("run aborted at iteration " + std::to_string(k) + ": " + err.what(),
                         state);
    } catch (const NumericalError& err) {
        throw RunAborted("run aborted at iteration " + std::to_string(k) + ": " + err.what(),
                         state);
    }
}

RunState run_bo(const ExperimentConfig& config, const Problem& problem) {
    RunState state = init_bo(config, problem);
    for (int i = 0; i < config.iterations; ++i) bo_step(state, problem);
    return state;
}

RunState run_fixed_surrogate(const ExperimentConfig& config, const Problem& problem) {
    config.validate();
    if (config.workflow != Workflow::Optim1)
        throw InputError("run_fixed_surrogate drives the fixed-surrogate workflow");
    RunState state;
    state.config = config;
    const int d = problem.dimension();
    Design doe = lhs_maximin(config.total_budget, d, stream_seed(config.seed, "doe"));
    try {
        state.evaluations = problem.evaluate_batch(doe.points, EvalSource::Doe, 0);
    } catch (const EvaluationError& err) {
        throw RunAborted(std::string("run aborted during the initial design: ") + err.what(),
                         std::move(state));
    }
    state.reference = freeze_reference(state.evaluations, config.reference_margin);
    state.reference_set = true;
    log_hypervolume(state, 0);

    try {
        TrainingData data = training_data(state.evaluations, d);
        Models models = fit_models(state, data, true);

        PopulationEvaluator surrogate = [&](const Matrix& U, Vector& f1, Vector& f2, Vector& g) {
            f1 = models.f1.predict_mean(U);
            f2 = models.f2.predict_mean(U);
            g = models.g.predict_mean(U);
        };
        Nsga2Options opt;
        opt.population = config.moea.population;
        opt.generations = config.moea.generations;
        opt.crossover_prob = config.moea.crossover_prob;
        opt.crossover_eta = config.moea.crossover_eta;
        opt.mutation_prob = config.moea.mutation_prob;
        opt.mutation_eta = config.moea.mutation_eta;
        Population pop = nsga2_run(surrogate, d, opt, stream_seed(config.seed, "moea"));

        // Rank 0 with any feasible member present is the feasible predicted
        // front; clones from crossover are collapsed before reporting.
        std::vector<const Individual*> chosen;
        for (const Individual& ind : pop.individuals)
            if (ind.rank == 0 && ind.g <= 0.0) chosen.push_back(&ind);
        std::sort(chosen.begin(), chosen.end(), [](const Individual* a, const Individual* b) {
            return a->f[0] != b->f[0] ? a->f[0] < b->f[0] : a->f[1] < b->f[1];
        });
        std::vector<const Individual*> unique;
        for (const Individual* ind : chosen) {
            if (!unique.empty() && std::abs(ind->f[0] - unique.back()->f[0]) <= 1e-12 &&
                std::abs(ind->f[1] - unique.back()->f[1]) <= 1e-12)
                continue;
            unique.push_back(ind);
        }
        state.front_designs = Matrix(static_cast<int>(unique.size()), d);
        state.front_objectives = Matrix(static_cast<int>(unique.size()), 2);
        for (std::size_t i = 0; i < unique.size(); ++i) {
            state.front_designs.row(static_cast<int>(i)) = unique[i]->x.transpose();
            state.front_objectives.row(static_cast<int>(i)) = unique[i]->f;
        }

        if (!unique.empty() && config.moea.verify_points > 0) {
            std::vector<int> picked =
                select_spread(state.front_objectives, config.moea.verify_points);
            Matrix designs(static_cast<int>(picked.size()), d);
            Matrix predicted(static_cast<int>(picked.size()), 2);
            for (std::size_t i = 0; i < picked.size(); ++i) {
                designs.row(static_cast<int>(i)) = state.front_designs.row(picked[i]);
                predicted.row(static_cast<int>(i)) = state.front_objectives.row(picked[i]);
            }
            PairEvaluator simulate = [&](const Vector& u) {
                Evaluation e = problem.evaluate(u, EvalSource::Verification, 0);
                state.evaluations.push_back(e);
                return Vector2(e.f1, e.f2);
            };
            state.verification = verify_front(designs, predicted, simulate);
        }
    } catch (const EvaluationError& err) {
        throw RunAborted(std::string("fixed-surrogate run aborted: ") + err.what(), state);
    } catch (const NumericalError& err) {
        throw RunAborted(std::string("fixed-surrogate run aborted: ") + err.what(), state);
    }
    return state;
}

RunState run_workflow(const ExperimentConfig& config, const Problem& problem) {
    if (config.workflow == Workflow::Optim1) return run_fixed_surrogate(config, problem);
    return run_bo(config, problem);
}

std::string save_state(const RunState& state) {
    json j;
    j["format"] = "mobo-run-state";
    j["version"] = 1;
    j["config"] = config_to_json(state.config);
    j["iteration"] = state.iteration;
    j["reference_set"] = state.reference_set;
    j["reference"] = json::array({state.reference[0], state.reference[1]});
    json evals = json::array();
    for (const Evaluation& e : state.evaluations) {
        evals.push_back(json{{"x", vector_to_json(e.x)},
                             {"f1", e.f1},
                             {"f2", e.f2},
                             {"g", e.g},
                             {"source", to_string(e.source)},
                             {"iteration", e.iteration}});
    }
    j["evaluations"] = std::move(evals);
    json logs = json::array();
    for (const IterationLog& entry : state.hv_log) {
        logs.push_back(json{{"iteration", entry.iteration},
                            {"evaluations", entry.evaluations},
                            {"hypervolume", entry.hypervolume},
                            {"feasible", entry.feasible}});
    }
    j["hv_log"] = std::move(logs);
    json models;
    models["valid"] = state.models.valid;
    if (state.models.valid) {
        models["f1"] = spec_to_json(state.models.f1);
        models["f2"] = spec_to_json(state.models.f2);
        models["g"] = spec_to_json(state.models.g);
    }
    j["models"] = std::move(models);
    j["front_designs"] = matrix_to_json(state.front_designs);
    j["front_objectives"] = matrix_to_json(state.front_objectives);
    json records = json::array();
    for (const VerificationRecord& rec : state.verification) {
        records.push_back(json{{"x", vector_to_json(rec.x)},
                               {"predicted", json::array({rec.predicted[0], rec.predicted[1]})},
                               {"simulated", json::array({rec.simulated[0], rec.simulated[1]})},
                               {"discrepancy", rec.discrepancy}});
    }
    j["verification"] = std::move(records);
    return j.dump(2) + "\n";
}

RunState load_state(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& err) {
        throw ConfigError(std::string("run state: ") + err.what());
    }
    try {
        if (!j.is_object() || j.value("format", std::string()) != "mobo-run-state")
            throw ConfigError("run state: unrecognized format");
        if (j.value("version", 0) != 1) throw ConfigError("run state: unsupported version");
        RunState state;
        state.config = config_from_json(j.at("config"));
        state.config.validate();
        state.iteration = j.at("iteration").get<int>();
        state.reference_set = j.at("reference_set").get<bool>();
        const json& ref = j.at("reference");
        state.reference = Vector2(ref.at(0).get<double>(), ref.at(1).get<double>());
        for (const json& e : j.at("evaluations")) {
            Evaluation eval;
            eval.x = vector_from_json(e.at("x"));
            eval.f1 = e.at("f1").get<double>();
            eval.f2 = e.at("f2").get<double>();
            eval.g = e.at("g").get<double>();
            eval.source = eval_source_from_string(e.at("source").get<std::string>());
            eval.iteration = e.at("iteration").get<int>();
            state.evaluations.push_back(std::move(eval));
        }
        for (const json& entry : j.at("hv_log")) {
            IterationLog log;
            log.iteration = entry.at("iteration").get<int>();
            log.evaluations = entry.at("evaluations").get<int>();
            log.hypervolume = entry.at("hypervolume").get<double>();
            log.feasible = entry.at("feasible").get<int>();
            state.hv_log.push_back(log);
        }
        const json& models = j.at("models");
        state.models.valid = models.at("valid").get<bool>();
        if (state.models.valid) {
            state.models.f1 = spec_from_json(models.at("f1"));
            state.models.f2 = spec_from_json(models.at("f2"));
            state.models.g = spec_from_json(models.at("g"));
        }
        state.front_designs = matrix_from_json(j.at("front_designs"));
        state.front_objectives = matrix_from_json(j.at("front_objectives"));
        for (const json& rec : j.at("verification")) {
            VerificationRecord record;
            record.x = vector_from_json(rec.at("x"));
            const json& p = rec.at("predicted");
            const json& s = rec.at("simulated");
            record.predicted = Vector2(p.at(0).get<double>(), p.at(1).get<double>());
            record.simulated = Vector2(s.at(0).get<double>(), s.at(1).get<double>());
            record.discrepancy = rec.at("discrepancy").get<double>();
            state.verification.push_back(std::move(record));
        }
        return state;
    } catch (const json::exception& err) {
        throw ConfigError(std::string("run state: ") + err.what());
    }
}

ComparisonReport compare_workflows(
    const std::vector<ExperimentConfig>& configs, int repetitions,
    const std::function<Problem(const ExperimentConfig&)>& problem_factory) {
    if (configs.empty()) throw InputError("comparison needs at least one configuration");
    if (repetitions < 1) throw InputError("comparison needs at least one repetition");
    for (const ExperimentConfig& c : configs) {
        c.validate();
        if (c.problem != configs.front().problem || c.total_budget != configs.front().total_budget)
            throw InputError("comparison: all configurations must share the problem and budget");
    }

    ComparisonReport report;
    report.workflows.resize(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i)
        report.workflows[i].workflow = configs[i].workflow;

    for (int r = 0; r < repetitions; ++r) {
        std::vector<RunState> states;
        states.reserve(configs.size());
        for (const ExperimentConfig& base : configs) {
            ExperimentConfig cfg = base;
            cfg.seed = base.seed + static_cast<std::uint64_t>(r);
            Problem problem =
                problem_factory ? problem_factory(cfg) : make_problem(cfg.problem);
            RunState state = run_workflow(cfg, problem);
            if (state.budget_spent() != cfg.total_budget)
                throw NumericalError("comparison: a run consumed " +
                                     std::to_string(state.budget_spent()) +
                                     " evaluations against a budget of " +
                                     std::to_string(cfg.total_budget));
            states.push_back(std::move(state));
        }
        report.seeds.push_back(configs.front().seed + static_cast<std::uint64_t>(r));

        // Workflows are scored against a common reference built from the
        // union of their true evaluations, re-simulated designs included.
        std::vector<Evaluation> pool;
        for (const RunState& state : states)
            pool.insert(pool.end(), state.evaluations.begin(), state.evaluations.end());
        Vector2 reference = freeze_reference(pool, configs.front().reference_margin);
        report.references.push_back(reference);

        double best = -std::numeric_limits<double>::infinity();
        std::size_t winner = 0;
        for (std::size_t i = 0; i < states.size(); ++i) {
            std::vector<Vector2> front = scoring_front(states[i]);
            double hv = front_hypervolume(front, reference);
            WorkflowSummary& summary = report.workflows[i];
            summary.final_hv.push_back(hv);
            summary.fronts.push_back(front_matrix(front));
            summary.trajectories.push_back(states[i].hv_log);
            if (hv > best) {
                best = hv;
                winner = i;
            }
        }
        report.workflows[winner].wins += 1;
    }
    for (WorkflowSummary& summary : report.workflows)
        summary.median_hv = median_of(summary.final_hv);
    return report;
}

}  // namespace mobo
