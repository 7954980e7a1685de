#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mobo/gp.hpp"
#include "mobo/pareto.hpp"
#include "mobo/types.hpp"

namespace mobo {

/// Augmented Chebyshev scalarization parameters; w weights the first objective.
struct ScalarizationWeights {
    double w = 0.5;
    double alpha = 0.05;

    void validate() const;
};

/// Multi-start pattern-search settings for the inner maximization.
struct MaximizeOptions {
    int screen = 256;  // space-filling candidates scored before the descents
    int restarts = 32;
    double step_init = 0.1;
    double step_min = 1e-4;
};

struct MaximizeResult {
    Vector point;
    double value = 0.0;
};

/// Criterion evaluated on a batch of candidate rows. Implementations must be
/// deterministic: the search compares values across polls.
using BatchCriterion = std::function<Vector(const Matrix&)>;

/// Everything a batch selection needs besides q and a seed. Models are
/// borrowed, not owned. Objective matrices hold true evaluations only;
/// fantasy conditioning stays internal to the selection call. All objectives
/// and the constraint are in minimization form with feasibility g <= 0.
struct AcquisitionContext {
    const GaussianProcessModel* model_f1 = nullptr;
    const GaussianProcessModel* model_f2 = nullptr;
    const GaussianProcessModel* model_g = nullptr;

    Matrix observed_objectives;  // all evaluated (f1, f2) rows, for normalization
    Matrix feasible_objectives;  // rows with g <= 0, for the scalarized incumbent
    std::vector<Vector2> front;  // feasible non-dominated pairs (EHVI mode)
    Vector2 reference = Vector2::Zero();

    int mc_samples = 4096;         // per candidate during inner maximization
    int mc_samples_final = 65536;  // for re-scoring the selected batch
    double sigmoid_temperature = 1e-3;
    double parego_alpha = 0.05;    // augmented-Chebyshev weight (scalarized mode)
    MaximizeOptions inner;
};

/// A selected batch. `values` re-scores each point with mc_samples_final
/// draws under the model state at its selection step. `fallback` marks
/// points placed by the space-filling rescue rather than the criterion.
struct BatchSelection {
    Matrix points;
    Vector values;
    std::vector<double> weights;  // scalarization draw per point (empty for EHVI)
    std::vector<bool> fallback;
};

/// max(best - prediction_mean, 0).
double improvement(double best, double prediction_mean);

/// Analytic expected improvement s(z Phi(z) + phi(z)); the s = 0 limit
/// degenerates to improvement(best, mean). Never negative.
double expected_improvement(double mean, double variance, double best);
double expected_improvement(const GaussianProcessModel& model, double best, const Vector& x);

/// alpha (w f1 + (1-w) f2) + max(w f1, (1-w) f2), objectives pre-normalized.
double parego_scalarize(double f1, double f2, const ScalarizationWeights& weights);

/// Phi(-mean / sqrt(variance)); indicator of mean <= 0 when variance is 0.
double feasibility_probability(double mean_g, double variance_g);
double feasibility_probability(const GaussianProcessModel& g_model, const Vector& x);

/// Expected feasible improvement: expected_improvement times feasibility.
double constrained_ei(const GaussianProcessModel& objective_model,
                      const GaussianProcessModel& constraint_model, double best,
                      const Vector& x);

/// Monte-Carlo expected hypervolume improvement at x: joint posterior draws
/// of (f1, f2, g), each hypervolume improvement against context.front
/// weighted by sigmoid(-g / temperature). Deterministic under the seed.
double ehvi_mc(const AcquisitionContext& context, const Vector& x, std::uint64_t seed);

/// Greedy q-batch via randomly scalarized expected improvement. Each point
/// draws a fresh weight w ~ U(0,1); after each selection all three models
/// are conditioned on a posterior sample at the chosen point.
BatchSelection qparego_select(const AcquisitionContext& context, int q, std::uint64_t seed);

/// Greedy q-batch via Monte-Carlo EHVI with fantasy conditioning; feasible
/// fantasies also join the working front between selections.
BatchSelection qehvi_select(const AcquisitionContext& context, int q, std::uint64_t seed);

/// Multi-start coordinate pattern search over [0,1]^dim. All restarts poll
/// in lock step so the criterion sees large batches. A flat criterion
/// returns some restart point with its (zero) value.
MaximizeResult maximize_acquisition(const BatchCriterion& criterion, int dim,
                                    const MaximizeOptions& options, std::uint64_t seed);
MaximizeResult maximize_acquisition(const std::function<double(const Vector&)>& criterion,
                                    int dim, const MaximizeOptions& options, std::uint64_t seed);

}  // namespace mobo
