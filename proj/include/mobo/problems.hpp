#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mobo/types.hpp"

namespace mobo {

/// One optimization variable. The optimizer always works in the unit
/// hypercube; `from_unit` maps a cube coordinate into the searchable
/// normalized sub-box [min_norm, max_norm], and `denormalize` applies the
/// affine map onto physical units.
struct VariableSpec {
    std::string name;
    double min_real = 0.0;
    double max_real = 1.0;
    std::string unit;  // annotation only, e.g. "mm" or "deg"
    double min_norm = 0.0;
    double max_norm = 1.0;

    /// Requires min_real < max_real and 0 <= min_norm < max_norm <= 1.
    void validate() const;

    /// min_real + (max_real - min_real) * x_norm; x_norm must lie in
    /// [min_norm, max_norm].
    double denormalize(double x_norm) const;

    /// Inverse of denormalize; x_real must lie in the image of the box.
    double normalize(double x_real) const;

    /// Affine map from the optimizer's [0,1] onto [min_norm, max_norm].
    double from_unit(double u) const;

    /// Inverse of from_unit.
    double to_unit(double x_norm) const;
};

/// Where an evaluation came from, for budget accounting and reporting.
enum class EvalSource { Doe, BoIteration, Verification };

/// "doe", "bo", or "verification"; the inverse raises ConfigError.
std::string to_string(EvalSource source);
EvalSource eval_source_from_string(const std::string& name);

/// One black-box evaluation. Objectives are minimized; g <= 0 is feasible.
struct Evaluation {
    Vector x;  // normalized design in [0,1]^d
    double f1 = 0.0;
    double f2 = 0.0;
    double g = 0.0;
    EvalSource source = EvalSource::Doe;
    int iteration = 0;      // BO iteration index, 0 outside the BO loop
    double wall_time = 0.0; // seconds spent in the evaluator, not serialized
};

/// Analytic description of a known Pareto front: the minimal attainable f2
/// for a given f1. Used by tests and verification reports to check that no
/// archive ever beats the true front.
struct KnownFront {
    double f1_lo = 0.0;
    double f1_hi = 0.0;
    std::function<double(double)> envelope;  // minimal feasible f2 at f1

    /// n points along the front, f1 ascending.
    Matrix sample(int n) const;
};

/// A constrained bi-objective black box over the unit hypercube.
/// Evaluators are deterministic; copies share the evaluation counter.
class Problem {
  public:
    using BatchEvaluator =
        std::function<void(const Matrix& U, Vector& f1, Vector& f2, Vector& g)>;

    Problem(std::string name, std::vector<VariableSpec> variables,
            BatchEvaluator evaluator,
            std::optional<KnownFront> front = std::nullopt);

    const std::string& name() const { return name_; }
    int dimension() const { return static_cast<int>(variables_.size()); }
    const std::vector<VariableSpec>& variables() const { return variables_; }
    const std::optional<KnownFront>& known_front() const { return front_; }

    /// Evaluate one design in [0,1]^d. Non-finite evaluator output raises
    /// EvaluationError; nothing is recorded for failed evaluations.
    Evaluation evaluate(const Vector& u, EvalSource source,
                        int iteration = 0) const;

    /// Evaluate a batch (one row per design). The evaluator may process
    /// rows concurrently; results keep row order.
    std::vector<Evaluation> evaluate_batch(const Matrix& U, EvalSource source,
                                           int iteration = 0) const;

    /// Total successful evaluations across all copies of this problem.
    std::int64_t evaluations() const;

    /// Physical-unit values of a unit-cube design, for reporting.
    Vector denormalized(const Vector& u) const;

  private:
    std::string name_;
    std::vector<VariableSpec> variables_;
    BatchEvaluator evaluator_;
    std::optional<KnownFront> front_;
    std::shared_ptr<std::atomic<std::int64_t>> count_;
};

/// Names of the built-in analytic benchmarks.
const std::vector<std::string>& builtin_problems();

/// Construct a built-in problem by name; unknown names raise InputError.
Problem make_problem(const std::string& name);

/// Settings for the external simulator adapter.
struct ExternalOptions {
    double timeout_seconds = 60.0;  // per evaluation
    int max_concurrency = 4;        // in-flight child processes
};

/// Wrap a command line as a Problem. Each evaluation launches one child
/// process (via /bin/sh -c), writes a single request line to its stdin and
/// reads a single response line from its stdout:
///
///   request:  {"id": <int>, "x": [<d reals in [0,1]>]}
///   response: {"id": <int>, "f1": <real>, "f2": <real>, "g": <real>}
///
/// Timeouts, malformed responses, id mismatches, non-finite values, and
/// nonzero exit codes raise EvaluationError carrying the design.
Problem external_adapter(std::string command,
                         std::vector<VariableSpec> variables,
                         ExternalOptions options = {});

/// Same, with d unit-box variables named x1..xd.
Problem external_adapter(std::string command, int dimension,
                         ExternalOptions options = {});

}  // namespace mobo
