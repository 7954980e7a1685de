#include "mobo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>

#include "mobo/doe.hpp"
#include "mobo/rng.hpp"

namespace mobo {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

Matrix standard_normals(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix Z(rows, cols);
    for (Eigen::Index i = 0; i < Z.rows(); ++i)
        for (Eigen::Index j = 0; j < Z.cols(); ++j) Z(i, j) = rng.normal();
    return Z;
}

// Conditioned working copies during greedy batch construction.
struct ModelSet {
    GaussianProcessModel f1, f2, g;
};

// Monte-Carlo EHVI over a candidate batch with common random numbers:
// Z holds fixed standard-normal draws (columns f1, f2, g) shared by every
// candidate so the criterion is a deterministic function of X.
Vector ehvi_batch(const ModelSet& models, const HviSurface& surface, double tau,
                  const Matrix& Z, const Matrix& X) {
    Vector m1, v1, m2, v2, mg, vg;
    models.f1.predict(X, m1, v1);
    models.f2.predict(X, m2, v2);
    models.g.predict(X, mg, vg);
    const auto samples = static_cast<double>(Z.rows());
    Vector out(X.rows());
    for (Eigen::Index b = 0; b < X.rows(); ++b) {
        const double s1 = std::sqrt(std::max(v1[b], 0.0));
        const double s2 = std::sqrt(std::max(v2[b], 0.0));
        const double sg = std::sqrt(std::max(vg[b], 0.0));
        double acc = 0.0;
        for (Eigen::Index s = 0; s < Z.rows(); ++s) {
            const double weight = 1.0 / (1.0 + std::exp((mg[b] + sg * Z(s, 2)) / tau));
            if (weight <= 0.0) continue;
            acc += weight * surface.improvement(m1[b] + s1 * Z(s, 0), m2[b] + s2 * Z(s, 1));
        }
        out[b] = acc / samples;
    }
    return out;
}

// Monte-Carlo expected improvement of the scalarized objectives, weighted by
// the analytic feasibility probability. Objectives are normalized with the
// observed lo/span before scalarization; g uses no random column.
Vector parego_batch(const ModelSet& models, const ScalarizationWeights& weights,
                    double incumbent, const Vector2& lo, const Vector2& span, const Matrix& Z,
                    const Matrix& X) {
    Vector m1, v1, m2, v2, mg, vg;
    models.f1.predict(X, m1, v1);
    models.f2.predict(X, m2, v2);
    models.g.predict(X, mg, vg);
    const auto samples = static_cast<double>(Z.rows());
    Vector out(X.rows());
    for (Eigen::Index b = 0; b < X.rows(); ++b) {
        const double s1 = std::sqrt(std::max(v1[b], 0.0));
        const double s2 = std::sqrt(std::max(v2[b], 0.0));
        double acc = 0.0;
        for (Eigen::Index s = 0; s < Z.rows(); ++s) {
            const double z1 = (m1[b] + s1 * Z(s, 0) - lo[0]) / span[0];
            const double z2 = (m2[b] + s2 * Z(s, 1) - lo[1]) / span[1];
            acc += improvement(incumbent, parego_scalarize(z1, z2, weights));
        }
        out[b] = (acc / samples) * feasibility_probability(mg[b], vg[b]);
    }
    return out;
}

// Best scalarized value among feasible evaluated points; with no feasible
// point yet, the best over all evaluated points stands in so the criterion
// still rewards improvement while the feasibility factor steers the search.
double scalarized_incumbent(const AcquisitionContext& ctx, const ScalarizationWeights& weights,
                            const Vector2& lo, const Vector2& span) {
    const Matrix& pool =
        ctx.feasible_objectives.rows() > 0 ? ctx.feasible_objectives : ctx.observed_objectives;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < pool.rows(); ++i) {
        const double z1 = (pool(i, 0) - lo[0]) / span[0];
        const double z2 = (pool(i, 1) - lo[1]) / span[1];
        best = std::min(best, parego_scalarize(z1, z2, weights));
    }
    return best;
}

// Deterministic rescue point: the pool candidate farthest from everything
// already occupied (training inputs, fantasies, the batch so far).
Vector space_filling_point(const Matrix& occupied, int dim, std::uint64_t seed) {
    const Matrix pool = lhs_basic(256, dim, seed).points;
    Eigen::Index pick = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < pool.rows(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (Eigen::Index r = 0; r < occupied.rows(); ++r)
            nearest = std::min(nearest, (pool.row(i) - occupied.row(r)).norm());
        if (nearest > best) {
            best = nearest;
            pick = i;
        }
    }
    return pool.row(pick);
}

void validate_models(const AcquisitionContext& ctx) {
    if (ctx.model_f1 == nullptr || ctx.model_f2 == nullptr || ctx.model_g == nullptr)
        throw InputError("acquisition: context must hold all three models");
    if (ctx.model_f1->size() < 1 || ctx.model_f2->size() < 1 || ctx.model_g->size() < 1)
        throw InputError("acquisition: models must be fitted");
    if (ctx.model_f2->dimension() != ctx.model_f1->dimension() ||
        ctx.model_g->dimension() != ctx.model_f1->dimension())
        throw InputError("acquisition: model input dimensions disagree");
    if (ctx.mc_samples < 1 || ctx.mc_samples_final < 1)
        throw InputError("acquisition: sample counts must be >= 1");
}

void validate_ehvi(const AcquisitionContext& ctx) {
    validate_models(ctx);
    if (!(ctx.sigmoid_temperature > 0.0))
        throw InputError("acquisition: sigmoid temperature must be positive");
}

// Normalization bounds over all evaluations so far; degenerate ranges are a
// precondition violation for the scalarized workflow.
std::pair<Vector2, Vector2> normalization_bounds(const AcquisitionContext& ctx) {
    if (ctx.observed_objectives.rows() < 1 || ctx.observed_objectives.cols() != 2)
        throw InputError("acquisition: observed objectives must be an n x 2 matrix");
    Vector2 lo(ctx.observed_objectives.col(0).minCoeff(), ctx.observed_objectives.col(1).minCoeff());
    Vector2 hi(ctx.observed_objectives.col(0).maxCoeff(), ctx.observed_objectives.col(1).maxCoeff());
    const Vector2 span = hi - lo;
    if (!(span[0] > 0.0) || !(span[1] > 0.0))
        throw InputError("acquisition: observed objective ranges are degenerate");
    return {lo, span};
}

BatchSelection greedy_select(const AcquisitionContext& ctx, int q, std::uint64_t seed,
                             bool parego) {
    if (q < 1) throw InputError("acquisition: batch size must be >= 1");
    if (parego)
        validate_models(ctx);
    else
        validate_ehvi(ctx);

    const int d = ctx.model_f1->dimension();
    ModelSet models{*ctx.model_f1, *ctx.model_f2, *ctx.model_g};
    std::vector<Vector2> front = ctx.front;
    Rng weight_rng(stream_seed(seed, "weights"));
    Rng fantasy_rng(stream_seed(seed, "fantasies"));

    Vector2 lo = Vector2::Zero(), span = Vector2::Ones();
    if (parego) std::tie(lo, span) = normalization_bounds(ctx);

    BatchSelection out;
    out.points = Matrix(q, d);
    out.values = Vector(q);
    out.fallback.assign(static_cast<std::size_t>(q), false);

    for (int j = 0; j < q; ++j) {
        const std::string tag = std::to_string(j);
        const Matrix Z = standard_normals(ctx.mc_samples, 3, stream_seed(seed, "mc-" + tag));

        ScalarizationWeights weights;
        weights.alpha = ctx.parego_alpha;
        double incumbent = 0.0;
        std::unique_ptr<HviSurface> surface;
        BatchCriterion criterion;
        if (parego) {
            weights.w = weight_rng.uniform();
            incumbent = scalarized_incumbent(ctx, weights, lo, span);
            criterion = [&models, weights, incumbent, lo, span, &Z](const Matrix& X) {
                return parego_batch(models, weights, incumbent, lo, span, Z, X);
            };
        } else {
            surface = std::make_unique<HviSurface>(front, ctx.reference);
            const double tau = ctx.sigmoid_temperature;
            criterion = [&models, &surface, tau, &Z](const Matrix& X) {
                return ehvi_batch(models, *surface, tau, Z, X);
            };
        }

        MaximizeResult res =
            maximize_acquisition(criterion, d, ctx.inner, stream_seed(seed, "step-" + tag));
        bool rescue = !(res.value > 0.0);
        for (int p = 0; !rescue && p < j; ++p)
            rescue = (out.points.row(p).transpose() - res.point).norm() < 1e-9;
        if (rescue) {
            Matrix occupied(models.f1.size() + j, d);
            occupied << models.f1.training_inputs(), out.points.topRows(j);
            res.point = space_filling_point(occupied, d, stream_seed(seed, "fallback-" + tag));
        }

        const Matrix Zf =
            standard_normals(ctx.mc_samples_final, 3, stream_seed(seed, "mcfinal-" + tag));
        const Matrix candidate = res.point.transpose();
        const Vector scored = parego
                                  ? parego_batch(models, weights, incumbent, lo, span, Zf, candidate)
                                  : ehvi_batch(models, *surface, ctx.sigmoid_temperature, Zf, candidate);

        out.points.row(j) = res.point.transpose();
        out.values[j] = scored[0];
        out.fallback[static_cast<std::size_t>(j)] = rescue;
        if (parego) out.weights.push_back(weights.w);

        if (j + 1 == q) break;
        const double f1_fantasy = models.f1.sample_posterior(res.point, fantasy_rng.next());
        const double f2_fantasy = models.f2.sample_posterior(res.point, fantasy_rng.next());
        const double g_fantasy = models.g.sample_posterior(res.point, fantasy_rng.next());
        models.f1 = models.f1.condition_on_virtual(res.point, f1_fantasy);
        models.f2 = models.f2.condition_on_virtual(res.point, f2_fantasy);
        models.g = models.g.condition_on_virtual(res.point, g_fantasy);
        if (!parego && g_fantasy <= 0.0) {
            front.emplace_back(f1_fantasy, f2_fantasy);
            std::vector<Vector2> kept;
            for (const int idx : non_dominated_filter(front)) kept.push_back(front[idx]);
            front = std::move(kept);
        }
    }
    return out;
}

}  // namespace

void ScalarizationWeights::validate() const {
    if (!(w >= 0.0 && w <= 1.0)) throw InputError("scalarization: w must lie in [0,1]");
    if (!(alpha > 0.0)) throw InputError("scalarization: alpha must be positive");
}

double improvement(double best, double prediction_mean) {
    return std::max(best - prediction_mean, 0.0);
}

double expected_improvement(double mean, double variance, double best) {
    if (!(variance > 0.0)) return improvement(best, mean);
    const double s = std::sqrt(variance);
    const double z = (best - mean) / s;
    return std::max(s * (z * normal_cdf(z) + normal_pdf(z)), 0.0);
}

double expected_improvement(const GaussianProcessModel& model, double best, const Vector& x) {
    const Prediction p = model.predict(x);
    return expected_improvement(p.mean, p.variance, best);
}

double parego_scalarize(double f1, double f2, const ScalarizationWeights& weights) {
    const double a = weights.w * f1;
    const double b = (1.0 - weights.w) * f2;
    return weights.alpha * (a + b) + std::max(a, b);
}

double feasibility_probability(double mean_g, double variance_g) {
    if (!(variance_g > 0.0)) return mean_g <= 0.0 ? 1.0 : 0.0;
    return normal_cdf(-mean_g / std::sqrt(variance_g));
}

double feasibility_probability(const GaussianProcessModel& g_model, const Vector& x) {
    const Prediction p = g_model.predict(x);
    return feasibility_probability(p.mean, p.variance);
}

double constrained_ei(const GaussianProcessModel& objective_model,
                      const GaussianProcessModel& constraint_model, double best,
                      const Vector& x) {
    return expected_improvement(objective_model, best, x) *
           feasibility_probability(constraint_model, x);
}

double ehvi_mc(const AcquisitionContext& context, const Vector& x, std::uint64_t seed) {
    validate_ehvi(context);
    if (x.size() != context.model_f1->dimension())
        throw InputError("ehvi_mc: candidate dimension mismatch");
    const ModelSet models{*context.model_f1, *context.model_f2, *context.model_g};
    const HviSurface surface(context.front, context.reference);
    const Matrix Z = standard_normals(context.mc_samples, 3, stream_seed(seed, "mc"));
    return ehvi_batch(models, surface, context.sigmoid_temperature, Z, x.transpose())[0];
}

BatchSelection qparego_select(const AcquisitionContext& context, int q, std::uint64_t seed) {
    return greedy_select(context, q, seed, true);
}

BatchSelection qehvi_select(const AcquisitionContext& context, int q, std::uint64_t seed) {
    return greedy_select(context, q, seed, false);
}

MaximizeResult maximize_acquisition(const BatchCriterion& criterion, int dim,
                                    const MaximizeOptions& options, std::uint64_t seed) {
    if (dim < 1) throw InputError("maximize_acquisition: dimension must be >= 1");
    if (options.restarts < 1) throw InputError("maximize_acquisition: restarts must be >= 1");
    if (options.screen < 1) throw InputError("maximize_acquisition: screen must be >= 1");
    if (!(options.step_min > 0.0) || !(options.step_init >= options.step_min))
        throw InputError("maximize_acquisition: need step_init >= step_min > 0");

    const int restarts = options.restarts;
    // Screening stage: score a space-filling pool in one batched call and
    // descend from the best rows. One descent start per screened candidate
    // when the pool is not larger than the restart count.
    const int pool_size = std::max(options.screen, restarts);
    const Matrix pool = pool_size >= 2
                            ? lhs_basic(pool_size, dim, stream_seed(seed, "restarts")).points
                            : Matrix::Constant(1, dim, 0.5);
    Vector pool_value = criterion(pool);
    if (pool_value.size() != pool_size)
        throw InputError("maximize_acquisition: criterion returned a wrong-sized batch");
    for (int r = 0; r < pool_size; ++r)
        if (std::isnan(pool_value[r])) pool_value[r] = -std::numeric_limits<double>::infinity();

    std::vector<int> order(static_cast<std::size_t>(pool_size));
    for (int r = 0; r < pool_size; ++r) order[static_cast<std::size_t>(r)] = r;
    std::stable_sort(order.begin(), order.end(),
                     [&pool_value](int a, int b) { return pool_value[a] > pool_value[b]; });

    Matrix X(restarts, dim);
    Vector value(restarts);
    for (int r = 0; r < restarts; ++r) {
        X.row(r) = pool.row(order[static_cast<std::size_t>(r)]);
        value[r] = pool_value[order[static_cast<std::size_t>(r)]];
    }

    Vector step = Vector::Constant(restarts, options.step_init);
    std::vector<char> active(static_cast<std::size_t>(restarts), 1);
    int remaining = restarts;

    // Rounds are capped so a pathological criterion cannot stall the run;
    // smooth criteria converge orders of magnitude sooner.
    const int levels =
        1 + static_cast<int>(std::ceil(std::log2(options.step_init / options.step_min)));
    const long max_rounds = 64L * levels;

    Matrix poll(static_cast<Eigen::Index>(restarts) * 2 * dim, dim);
    std::vector<int> owner(static_cast<std::size_t>(restarts) * 2 * static_cast<std::size_t>(dim));
    for (long round = 0; remaining > 0 && round < max_rounds; ++round) {
        Eigen::Index rows = 0;
        for (int r = 0; r < restarts; ++r) {
            if (!active[static_cast<std::size_t>(r)]) continue;
            for (int j = 0; j < dim; ++j) {
                for (const double sign : {1.0, -1.0}) {
                    const double moved = std::clamp(X(r, j) + sign * step[r], 0.0, 1.0);
                    if (moved == X(r, j)) continue;
                    poll.row(rows) = X.row(r);
                    poll(rows, j) = moved;
                    owner[static_cast<std::size_t>(rows)] = r;
                    ++rows;
                }
            }
        }
        Vector polled = criterion(poll.topRows(rows));
        if (polled.size() != rows)
            throw InputError("maximize_acquisition: criterion returned a wrong-sized batch");

        std::vector<char> improved(static_cast<std::size_t>(restarts), 0);
        for (Eigen::Index i = 0; i < rows; ++i) {
            const int r = owner[static_cast<std::size_t>(i)];
            if (polled[i] > value[r]) {
                value[r] = polled[i];
                X.row(r) = poll.row(i);
                improved[static_cast<std::size_t>(r)] = 1;
            }
        }
        for (int r = 0; r < restarts; ++r) {
            if (!active[static_cast<std::size_t>(r)] || improved[static_cast<std::size_t>(r)])
                continue;
            step[r] *= 0.5;
            if (step[r] < options.step_min) {
                active[static_cast<std::size_t>(r)] = 0;
                --remaining;
            }
        }
    }

    int best = 0;
    for (int r = 1; r < restarts; ++r)
        if (value[r] > value[best]) best = r;
    MaximizeResult out;
    out.point = X.row(best);
    out.value = std::isfinite(value[best]) ? value[best] : 0.0;
    return out;
}

MaximizeResult maximize_acquisition(const std::function<double(const Vector&)>& criterion,
                                    int dim, const MaximizeOptions& options, std::uint64_t seed) {
    BatchCriterion batched = [&criterion](const Matrix& X) {
        Vector out(X.rows());
        for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = criterion(X.row(i));
        return out;
    };
    return maximize_acquisition(batched, dim, options, seed);
}

}  // namespace mobo
