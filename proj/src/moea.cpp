#include "mobo/moea.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mobo/pareto.hpp"
#include "mobo/rng.hpp"

namespace mobo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Fronts in rank order; individuals get their rank written back.
std::vector<std::vector<int>> sort_fronts(std::vector<Individual>& pop) {
    const int n = static_cast<int>(pop.size());
    std::vector<std::vector<int>> dominated(static_cast<std::size_t>(n));
    std::vector<int> count(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        const auto& a = pop[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n; ++j) {
            const auto& b = pop[static_cast<std::size_t>(j)];
            if (constrained_dominates(a.f, a.g, b.f, b.g)) {
                dominated[static_cast<std::size_t>(i)].push_back(j);
                ++count[static_cast<std::size_t>(j)];
            } else if (constrained_dominates(b.f, b.g, a.f, a.g)) {
                dominated[static_cast<std::size_t>(j)].push_back(i);
                ++count[static_cast<std::size_t>(i)];
            }
        }
    }
    std::vector<std::vector<int>> fronts;
    std::vector<int> current;
    for (int i = 0; i < n; ++i)
        if (count[static_cast<std::size_t>(i)] == 0) current.push_back(i);
    while (!current.empty()) {
        const int rank = static_cast<int>(fronts.size());
        for (const int i : current) pop[static_cast<std::size_t>(i)].rank = rank;
        std::vector<int> next;
        for (const int i : current)
            for (const int j : dominated[static_cast<std::size_t>(i)])
                if (--count[static_cast<std::size_t>(j)] == 0) next.push_back(j);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

void assign_crowding(std::vector<Individual>& pop, const std::vector<int>& front) {
    for (const int i : front) pop[static_cast<std::size_t>(i)].crowding = 0.0;
    const int m = static_cast<int>(front.size());
    if (m == 1) {
        pop[static_cast<std::size_t>(front[0])].crowding = kInf;
        return;
    }
    std::vector<int> order(front.begin(), front.end());
    for (int axis = 0; axis < 2; ++axis) {
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double fa = pop[static_cast<std::size_t>(a)].f[axis];
            const double fb = pop[static_cast<std::size_t>(b)].f[axis];
            return fa != fb ? fa < fb : a < b;
        });
        auto& lo = pop[static_cast<std::size_t>(order.front())];
        auto& hi = pop[static_cast<std::size_t>(order.back())];
        lo.crowding = kInf;
        hi.crowding = kInf;
        const double span = hi.f[axis] - lo.f[axis];
        if (span <= 0.0) continue;
        for (int k = 1; k + 1 < m; ++k) {
            auto& mid = pop[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
            if (mid.crowding == kInf) continue;
            mid.crowding += (pop[static_cast<std::size_t>(order[static_cast<std::size_t>(k + 1)])]
                                 .f[axis] -
                             pop[static_cast<std::size_t>(order[static_cast<std::size_t>(k - 1)])]
                                 .f[axis]) /
                            span;
        }
    }
    // duplicated objective pairs are deprioritized unless they hold a boundary
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& fa = pop[static_cast<std::size_t>(a)].f;
        const auto& fb = pop[static_cast<std::size_t>(b)].f;
        if (fa[0] != fb[0]) return fa[0] < fb[0];
        if (fa[1] != fb[1]) return fa[1] < fb[1];
        return a < b;
    });
    auto same_pair = [&](int a, int b) {
        const auto& fa = pop[static_cast<std::size_t>(a)].f;
        const auto& fb = pop[static_cast<std::size_t>(b)].f;
        return fa[0] == fb[0] && fa[1] == fb[1];
    };
    for (int k = 0; k < m; ++k) {
        const int self = order[static_cast<std::size_t>(k)];
        const bool dup = (k > 0 && same_pair(order[static_cast<std::size_t>(k - 1)], self)) ||
                         (k + 1 < m && same_pair(order[static_cast<std::size_t>(k + 1)], self));
        auto& ind = pop[static_cast<std::size_t>(self)];
        if (dup && ind.crowding != kInf) ind.crowding = 0.0;
    }
}

// (rank asc, crowding desc) with index as the deterministic tie-break.
bool better(const Individual& a, const Individual& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.crowding > b.crowding;
}

void evaluate_into(const PopulationEvaluator& evaluate, std::vector<Individual>& pop,
                   const Matrix& X) {
    Vector f1, f2, g;
    evaluate(X, f1, f2, g);
    if (f1.size() != X.rows() || f2.size() != X.rows() || g.size() != X.rows())
        throw InputError("nsga2: evaluator returned wrong-sized outputs");
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        auto& ind = pop[static_cast<std::size_t>(i)];
        ind.x = X.row(i);
        ind.f = Vector2(f1[i], f2[i]);
        ind.g = g[i];
    }
}

void sbx_pair(Vector& a, Vector& b, double eta, Rng& rng) {
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        if (rng.uniform() > 0.5) continue;
        double y1 = a[j], y2 = b[j];
        if (std::abs(y1 - y2) < 1e-14) continue;
        if (y1 > y2) std::swap(y1, y2);
        const double u = rng.uniform();
        auto spread = [&](double beta) {
            const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
            return u <= 1.0 / alpha ? std::pow(u * alpha, 1.0 / (eta + 1.0))
                                    : std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
        };
        const double bq1 = spread(1.0 + 2.0 * y1 / (y2 - y1));
        const double bq2 = spread(1.0 + 2.0 * (1.0 - y2) / (y2 - y1));
        double c1 = 0.5 * ((y1 + y2) - bq1 * (y2 - y1));
        double c2 = 0.5 * ((y1 + y2) + bq2 * (y2 - y1));
        c1 = std::clamp(c1, 0.0, 1.0);
        c2 = std::clamp(c2, 0.0, 1.0);
        if (rng.uniform() <= 0.5) std::swap(c1, c2);
        a[j] = c1;
        b[j] = c2;
    }
}

void polynomial_mutation(Vector& x, double prob, double eta, Rng& rng) {
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (rng.uniform() > prob) continue;
        const double u = rng.uniform();
        double dq;
        if (u < 0.5) {
            const double xy = 1.0 - x[j];
            dq = std::pow(2.0 * u + (1.0 - 2.0 * u) * std::pow(xy, eta + 1.0),
                          1.0 / (eta + 1.0)) -
                 1.0;
        } else {
            const double xy = x[j];
            dq = 1.0 - std::pow(2.0 * (1.0 - u) + (2.0 * u - 1.0) * std::pow(xy, eta + 1.0),
                                1.0 / (eta + 1.0));
        }
        x[j] = std::clamp(x[j] + dq, 0.0, 1.0);
    }
}

}  // namespace

bool constrained_dominates(const Vector2& fa, double ga, const Vector2& fb, double gb) {
    const double va = std::max(ga, 0.0);
    const double vb = std::max(gb, 0.0);
    if (va > 0.0 || vb > 0.0) return va < vb;
    return dominates(fa, fb);
}

void rank_and_crowd(std::vector<Individual>& individuals) {
    if (individuals.empty()) return;
    const auto fronts = sort_fronts(individuals);
    for (const auto& front : fronts) assign_crowding(individuals, front);
}

Population nsga2_run(const PopulationEvaluator& evaluate, int dim, const Nsga2Options& options,
                     std::uint64_t seed) {
    if (dim < 1) throw InputError("nsga2: dimension must be >= 1");
    if (options.population < 2) throw InputError("nsga2: population must be >= 2");
    if (options.generations < 0) throw InputError("nsga2: generations must be >= 0");
    const int n = options.population;
    const double pm = options.mutation_prob < 0.0 ? 1.0 / dim : options.mutation_prob;

    Rng rng(seed);
    Matrix X(n, dim);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = rng.uniform();

    Population pop;
    pop.individuals.resize(static_cast<std::size_t>(n));
    evaluate_into(evaluate, pop.individuals, X);
    rank_and_crowd(pop.individuals);
    if (options.on_generation) options.on_generation(pop);

    auto tournament = [&]() -> const Individual& {
        const auto& a = pop.individuals[static_cast<std::size_t>(rng.below(n))];
        const auto& b = pop.individuals[static_cast<std::size_t>(rng.below(n))];
        return better(b, a) ? b : a;
    };

    for (int gen = 1; gen <= options.generations; ++gen) {
        Matrix children(n, dim);
        int made = 0;
        while (made < n) {
            Vector a = tournament().x;
            Vector b = tournament().x;
            if (rng.uniform() <= options.crossover_prob)
                sbx_pair(a, b, options.crossover_eta, rng);
            polynomial_mutation(a, pm, options.mutation_eta, rng);
            polynomial_mutation(b, pm, options.mutation_eta, rng);
            children.row(made++) = a;
            if (made < n) children.row(made++) = b;
        }

        std::vector<Individual> offspring(static_cast<std::size_t>(n));
        evaluate_into(evaluate, offspring, children);
        std::vector<Individual> combined = pop.individuals;
        combined.insert(combined.end(), offspring.begin(), offspring.end());
        const auto fronts = sort_fronts(combined);
        for (const auto& front : fronts) assign_crowding(combined, front);

        std::vector<Individual> survivors;
        survivors.reserve(static_cast<std::size_t>(n));
        for (const auto& front : fronts) {
            if (static_cast<int>(survivors.size() + front.size()) <= n) {
                for (const int i : front) survivors.push_back(combined[static_cast<std::size_t>(i)]);
                continue;
            }
            std::vector<int> order(front.begin(), front.end());
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                const double ca = combined[static_cast<std::size_t>(a)].crowding;
                const double cb = combined[static_cast<std::size_t>(b)].crowding;
                return ca != cb ? ca > cb : a < b;
            });
            for (const int i : order) {
                if (static_cast<int>(survivors.size()) == n) break;
                survivors.push_back(combined[static_cast<std::size_t>(i)]);
            }
            break;
        }
        pop.individuals = std::move(survivors);
        rank_and_crowd(pop.individuals);
        pop.generation = gen;
        if (options.on_generation) options.on_generation(pop);
    }
    return pop;
}

std::vector<int> select_spread(const Matrix& objectives, int k) {
    const int n = static_cast<int>(objectives.rows());
    std::vector<int> picked;
    if (n == 0 || k <= 0) return picked;
    if (k >= n) {
        picked.resize(static_cast<std::size_t>(n));
        std::iota(picked.begin(), picked.end(), 0);
        return picked;
    }
    int start = 0;
    for (int i = 1; i < n; ++i)
        if (objectives(i, 0) < objectives(start, 0)) start = i;
    picked.push_back(start);
    Vector nearest(n);
    for (int i = 0; i < n; ++i)
        nearest[i] = (objectives.row(i) - objectives.row(start)).norm();
    while (static_cast<int>(picked.size()) < k) {
        int far = 0;
        for (int i = 1; i < n; ++i)
            if (nearest[i] > nearest[far]) far = i;
        picked.push_back(far);
        for (int i = 0; i < n; ++i)
            nearest[i] = std::min(nearest[i], (objectives.row(i) - objectives.row(far)).norm());
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

std::vector<VerificationRecord> verify_front(const Matrix& designs, const Matrix& predicted,
                                             const PairEvaluator& simulate) {
    if (designs.rows() != predicted.rows() || predicted.cols() != 2)
        throw InputError("verify_front: designs and predicted pairs must align");
    std::vector<VerificationRecord> records;
    records.reserve(static_cast<std::size_t>(designs.rows()));
    for (Eigen::Index i = 0; i < designs.rows(); ++i) {
        VerificationRecord rec;
        rec.x = designs.row(i);
        rec.predicted = Vector2(predicted(i, 0), predicted(i, 1));
        rec.simulated = simulate(rec.x);
        rec.discrepancy = (rec.predicted - rec.simulated).cwiseAbs().maxCoeff();
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace mobo
