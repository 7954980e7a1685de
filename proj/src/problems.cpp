#include "mobo/problems.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

namespace mobo {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw InputError(what);
}

}  // namespace

std::string to_string(EvalSource source) {
    switch (source) {
        case EvalSource::Doe: return "doe";
        case EvalSource::BoIteration: return "bo";
        case EvalSource::Verification: return "verification";
    }
    throw InputError("unknown evaluation source");
}

EvalSource eval_source_from_string(const std::string& name) {
    if (name == "doe") return EvalSource::Doe;
    if (name == "bo") return EvalSource::BoIteration;
    if (name == "verification") return EvalSource::Verification;
    throw ConfigError("unknown evaluation source \"" + name + "\"");
}

void VariableSpec::validate() const {
    require(!name.empty(), "variable name must not be empty");
    require(min_real < max_real, "variable requires min_real < max_real");
    require(0.0 <= min_norm && min_norm < max_norm && max_norm <= 1.0,
            "variable requires 0 <= min_norm < max_norm <= 1");
}

// Box membership allows a 1e-12 slack and results are clamped back into the
// box, so affine round trips cannot drift outside by rounding.

double VariableSpec::denormalize(double x_norm) const {
    if (!(x_norm >= min_norm - 1e-12 && x_norm <= max_norm + 1e-12))
        throw InputError("normalized value outside [min_norm, max_norm] for " + name);
    return min_real + (max_real - min_real) * std::clamp(x_norm, min_norm, max_norm);
}

double VariableSpec::normalize(double x_real) const {
    const double x_norm = (x_real - min_real) / (max_real - min_real);
    if (!(x_norm >= min_norm - 1e-12 && x_norm <= max_norm + 1e-12))
        throw InputError("real value outside the variable box for " + name);
    return std::clamp(x_norm, min_norm, max_norm);
}

double VariableSpec::from_unit(double u) const {
    if (!(u >= -1e-12 && u <= 1.0 + 1e-12))
        throw InputError("unit-cube coordinate outside [0,1] for " + name);
    const double x = min_norm + (max_norm - min_norm) * std::clamp(u, 0.0, 1.0);
    return std::clamp(x, min_norm, max_norm);
}

double VariableSpec::to_unit(double x_norm) const {
    if (!(x_norm >= min_norm - 1e-12 && x_norm <= max_norm + 1e-12))
        throw InputError("normalized value outside [min_norm, max_norm] for " + name);
    const double u =
        (std::clamp(x_norm, min_norm, max_norm) - min_norm) / (max_norm - min_norm);
    return std::clamp(u, 0.0, 1.0);
}

Matrix KnownFront::sample(int n) const {
    require(n >= 2, "front sample needs at least 2 points");
    require(static_cast<bool>(envelope), "front has no envelope");
    Matrix out(n, 2);
    for (int i = 0; i < n; ++i) {
        const double f1 = f1_lo + (f1_hi - f1_lo) * i / (n - 1);
        out(i, 0) = f1;
        out(i, 1) = envelope(f1);
    }
    return out;
}

Problem::Problem(std::string name, std::vector<VariableSpec> variables,
                 BatchEvaluator evaluator, std::optional<KnownFront> front)
    : name_(std::move(name)),
      variables_(std::move(variables)),
      evaluator_(std::move(evaluator)),
      front_(std::move(front)),
      count_(std::make_shared<std::atomic<std::int64_t>>(0)) {
    require(!variables_.empty(), "problem needs at least one variable");
    for (const auto& v : variables_) v.validate();
    require(static_cast<bool>(evaluator_), "problem needs an evaluator");
}

Evaluation Problem::evaluate(const Vector& u, EvalSource source,
                             int iteration) const {
    Matrix U(1, u.size());
    U.row(0) = u;
    return evaluate_batch(U, source, iteration).front();
}

std::vector<Evaluation> Problem::evaluate_batch(const Matrix& U,
                                                EvalSource source,
                                                int iteration) const {
    const auto n = U.rows();
    require(n >= 1, "empty evaluation batch");
    require(U.cols() == dimension(), "design dimension mismatch");
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < U.cols(); ++j)
            if (!(U(i, j) >= 0.0 && U(i, j) <= 1.0))
                throw InputError("design outside the unit hypercube");

    Vector f1(n), f2(n), g(n);
    const auto t0 = std::chrono::steady_clock::now();
    evaluator_(U, f1, f2, g);
    const auto t1 = std::chrono::steady_clock::now();
    if (f1.size() != n || f2.size() != n || g.size() != n)
        throw NumericalError("evaluator returned a wrong-sized batch");

    const double per_point =
        std::chrono::duration<double>(t1 - t0).count() / static_cast<double>(n);
    std::vector<Evaluation> out(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(f1[i]) || !std::isfinite(f2[i]) || !std::isfinite(g[i]))
            throw EvaluationError("evaluator produced a non-finite value", U.row(i));
        auto& e = out[static_cast<std::size_t>(i)];
        e.x = U.row(i);
        e.f1 = f1[i];
        e.f2 = f2[i];
        e.g = g[i];
        e.source = source;
        e.iteration = iteration;
        e.wall_time = per_point;
    }
    count_->fetch_add(n, std::memory_order_relaxed);
    return out;
}

std::int64_t Problem::evaluations() const {
    return count_->load(std::memory_order_relaxed);
}

Vector Problem::denormalized(const Vector& u) const {
    require(u.size() == dimension(), "design dimension mismatch");
    Vector x(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const auto& v = variables_[static_cast<std::size_t>(i)];
        x[i] = v.denormalize(v.from_unit(u[i]));
    }
    return x;
}

namespace {

// --- BNH ------------------------------------------------------------------
//
// min f1 = 4x^2 + 4y^2, f2 = (x-5)^2 + (y-5)^2
// s.t. (x-5)^2 + y^2 <= 25, (x-8)^2 + (y+3)^2 >= 7.7, x in [0,5], y in [0,3].
// Pareto-optimal set: x = y = t for t in [0,3], then y = 3, x in [3,5].

double bnh_envelope(double f1) {
    if (f1 <= 0.0) return 50.0;
    if (f1 <= 72.0) {
        const double t = std::sqrt(f1 / 8.0);
        return 2.0 * (t - 5.0) * (t - 5.0);
    }
    if (f1 <= 136.0) {
        const double x = std::sqrt((f1 - 36.0) / 4.0);
        return (x - 5.0) * (x - 5.0) + 4.0;
    }
    return 4.0;
}

Problem make_bnh() {
    std::vector<VariableSpec> vars = {
        {"x", 0.0, 5.0, "-", 0.0, 1.0},
        {"y", 0.0, 3.0, "-", 0.0, 1.0},
    };
    auto eval = [](const Matrix& U, Vector& f1, Vector& f2, Vector& g) {
        for (Eigen::Index i = 0; i < U.rows(); ++i) {
            const double x = 5.0 * U(i, 0);
            const double y = 3.0 * U(i, 1);
            f1[i] = 4.0 * x * x + 4.0 * y * y;
            f2[i] = (x - 5.0) * (x - 5.0) + (y - 5.0) * (y - 5.0);
            const double c1 = (x - 5.0) * (x - 5.0) + y * y - 25.0;
            const double c2 = 7.7 - (x - 8.0) * (x - 8.0) - (y + 3.0) * (y + 3.0);
            g[i] = std::max(c1, c2);
        }
    };
    KnownFront front{0.0, 136.0, bnh_envelope};
    return Problem("bnh", std::move(vars), eval, front);
}

// --- SRN ------------------------------------------------------------------
//
// min f1 = 2 + (x-2)^2 + (y-1)^2, f2 = 9x - (y-1)^2
// s.t. x^2 + y^2 <= 225, x - 3y + 10 <= 0, x, y in [-20, 20].

Problem make_srn() {
    std::vector<VariableSpec> vars = {
        {"x", -20.0, 20.0, "-", 0.0, 1.0},
        {"y", -20.0, 20.0, "-", 0.0, 1.0},
    };
    auto eval = [](const Matrix& U, Vector& f1, Vector& f2, Vector& g) {
        for (Eigen::Index i = 0; i < U.rows(); ++i) {
            const double x = -20.0 + 40.0 * U(i, 0);
            const double y = -20.0 + 40.0 * U(i, 1);
            f1[i] = 2.0 + (x - 2.0) * (x - 2.0) + (y - 1.0) * (y - 1.0);
            f2[i] = 9.0 * x - (y - 1.0) * (y - 1.0);
            g[i] = std::max(x * x + y * y - 225.0, x - 3.0 * y + 10.0);
        }
    };
    return Problem("srn", std::move(vars), eval);
}

// --- synrel-toy -------------------------------------------------------------
//
// A 12-variable stand-in for a rotor design study. Three variable groups of
// three layers each (permanent-magnet radius, radial bridge, opening angle)
// plus magnet lengths. Objectives are minimized:
//
//   f1 = -torque, torque = 350 * prod_i sin(pi (lo_i + sp_i u_i))^{w_i}
//   f2 = -power ratio, ratio = A/B with quadratics A <= B, so ratio in (0,1]
//   g  = (emf - 650) / 64, emf a linear-plus-quadratic response
//
// All emf coefficients are dyadic, so at the dyadic boundary design below the
// response is exactly 650 and g is exactly 0. About 30% of the unit cube is
// infeasible, and the constraint is active at the highest-torque designs:
// the same coordinates that raise torque raise the emf.

constexpr int kToyDim = 12;

// per-coordinate torque factors sin(pi (lo + sp u))^w
constexpr double kLo[kToyDim] = {0.10, 0.10, 0.10, 0.18, 0.18, 0.18,
                                 0.50, 0.50, 0.50, 0.15, 0.15, 0.15};
constexpr double kSp[kToyDim] = {0.40, 0.40, 0.40, 0.80, 0.80, 0.80,
                                 0.40, 0.40, 0.40, 0.35, 0.35, 0.35};
constexpr double kW[kToyDim] = {0.80, 0.80, 0.80, 0.30, 0.30, 0.30,
                                1.00, 1.00, 1.00, 0.50, 0.50, 0.50};

// power ratio A/B: A = 1 + 0.3 |u - 0.5|^2, B = A + sum q2_i (u_i - s_i)^2
constexpr double kQ2[kToyDim] = {0.5, 0.5, 0.5, 0.2, 0.2, 0.2,
                                 0.8, 0.8, 0.8, 0.3, 0.3, 0.3};
constexpr double kS[kToyDim] = {0.25, 0.25, 0.25, 0.50, 0.50, 0.50,
                                0.85, 0.85, 0.85, 0.30, 0.30, 0.30};

// emf = c0 + sum a_i u_i + b_i u_i^2, all coefficients dyadic; c0 makes the
// response exactly 650 at u* = (9/16 x3, 1/2 x3, 5/16 x3, 1/2 x3)
constexpr double kEmfA[kToyDim] = {40.0, 40.0, 40.0, -12.0, -12.0, -12.0,
                                   -56.0, -56.0, -56.0, 20.0, 20.0, 20.0};
constexpr double kEmfB[kToyDim] = {24.0, 24.0, 24.0, 8.0, 8.0, 8.0,
                                   16.0, 16.0, 16.0, 12.0, 12.0, 12.0};
constexpr double kEmfC0 = 650.0 - 69.46875;

Problem make_synrel_toy() {
    std::vector<VariableSpec> vars;
    const char* group[4] = {"rad_pm", "rad_brid", "beta", "pm_len"};
    const char* unit[4] = {"mm", "mm", "deg", "mm"};
    const double real_lo[4] = {60.0, 1.0, 10.0, 5.0};
    const double real_hi[4] = {100.0, 6.0, 60.0, 30.0};
    for (int gix = 0; gix < 4; ++gix)
        for (int layer = 1; layer <= 3; ++layer) {
            VariableSpec v;
            v.name = std::string(group[gix]) + "_l" + std::to_string(layer);
            v.min_real = real_lo[gix];
            v.max_real = real_hi[gix];
            v.unit = unit[gix];
            // the first magnet radius searches a narrower band
            v.min_norm = (gix == 0 && layer == 1) ? 0.6 : 0.1;
            v.max_norm = 0.9;
            vars.push_back(v);
        }

    auto eval = [](const Matrix& U, Vector& f1, Vector& f2, Vector& g) {
        for (Eigen::Index i = 0; i < U.rows(); ++i) {
            double torque = 350.0;
            double a = 0.0, b = 0.0, emf = kEmfC0;
            for (int j = 0; j < kToyDim; ++j) {
                const double u = U(i, j);
                torque *= std::pow(
                    std::sin(std::numbers::pi * (kLo[j] + kSp[j] * u)), kW[j]);
                const double da = u - 0.5;
                const double ds = u - kS[j];
                a += 0.3 * da * da;
                b += kQ2[j] * ds * ds;
                emf += kEmfA[j] * u + kEmfB[j] * (u * u);
            }
            f1[i] = -torque;
            f2[i] = -(1.0 + a) / (1.0 + a + b);
            g[i] = (emf - 650.0) / 64.0;
        }
    };
    return Problem("synrel-toy", std::move(vars), eval);
}

}  // namespace

const std::vector<std::string>& builtin_problems() {
    static const std::vector<std::string> names = {"bnh", "srn", "synrel-toy"};
    return names;
}

Problem make_problem(const std::string& name) {
    if (name == "bnh") return make_bnh();
    if (name == "srn") return make_srn();
    if (name == "synrel-toy") return make_synrel_toy();
    throw InputError("unknown problem: " + name);
}

}  // namespace mobo
