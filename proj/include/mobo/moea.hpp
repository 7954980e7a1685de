#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mobo/types.hpp"

namespace mobo {

struct Individual {
    Vector x;
    Vector2 f = Vector2::Zero();
    double g = 0.0;
    int rank = 0;
    double crowding = 0.0;
};

struct Population {
    std::vector<Individual> individuals;
    int generation = 0;
};

/// Evaluates a batch of designs (rows of X) into two objectives and one
/// constraint value per row. Surrogate-driven runs plug in posterior means;
/// tests may plug in analytic functions.
using PopulationEvaluator =
    std::function<void(const Matrix& X, Vector& f1, Vector& f2, Vector& g)>;

struct Nsga2Options {
    int population = 100;
    int generations = 200;
    double crossover_prob = 0.9;
    double crossover_eta = 15.0;
    double mutation_prob = -1.0;  // negative: defaults to 1/dim
    double mutation_eta = 20.0;
    std::function<void(const Population&)> on_generation;  // optional observer
};

/// Deb's constrained dominance: feasible beats infeasible, infeasible
/// compare by violation max(g, 0), feasible compare by Pareto dominance.
bool constrained_dominates(const Vector2& fa, double ga, const Vector2& fb, double gb);

/// Assign non-dominated ranks and crowding distances in place. Boundary
/// individuals of each rank get infinite crowding; duplicated objective
/// pairs get crowding zero unless they hold a boundary slot.
void rank_and_crowd(std::vector<Individual>& individuals);

/// Bounded NSGA-II on [0,1]^dim: binary tournament, simulated binary
/// crossover, polynomial mutation, elitist (mu + lambda) truncation.
Population nsga2_run(const PopulationEvaluator& evaluate, int dim, const Nsga2Options& options,
                     std::uint64_t seed);

/// Farthest-point subset of k rows (Euclidean, seeded at the first-column
/// minimum); returns all indices when k >= rows.
std::vector<int> select_spread(const Matrix& objectives, int k);

struct VerificationRecord {
    Vector x;
    Vector2 predicted = Vector2::Zero();
    Vector2 simulated = Vector2::Zero();
    double discrepancy = 0.0;  // max absolute component difference
};

using PairEvaluator = std::function<Vector2(const Vector&)>;

/// Re-evaluate predicted front designs with the true evaluator and pair the
/// results. Evaluator failures propagate with the design attached.
std::vector<VerificationRecord> verify_front(const Matrix& designs, const Matrix& predicted,
                                             const PairEvaluator& simulate);

}  // namespace mobo
