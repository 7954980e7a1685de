#pragma once

#include <vector>

#include "mobo/types.hpp"

namespace mobo {

/// a dominates b in the minimization sense: a <= b component-wise, a != b.
bool dominates(const Vector2& a, const Vector2& b);

/// Indices of points not dominated by any other point, in input order.
std::vector<int> non_dominated_filter(const std::vector<Vector2>& points);

/// Exact area dominated by `front` within the box bounded by `ref`
/// (minimization; points beyond the reference contribute nothing).
double hypervolume_2d(const std::vector<Vector2>& front, const Vector2& ref);

/// HV(front + candidate) - HV(front); zero when the candidate is dominated.
double hypervolume_improvement(const std::vector<Vector2>& front, const Vector2& ref,
                               const Vector2& candidate);

/// Non-dominated staircase frozen for repeated improvement queries
/// (the Monte-Carlo hot path). Query cost is O(log n + segments covered).
class HviSurface {
public:
    HviSurface(const std::vector<Vector2>& front, const Vector2& ref);

    double hypervolume() const { return hv_; }
    const Vector2& reference() const { return ref_; }

    double improvement(double f1, double f2) const;
    double improvement(const Vector2& c) const { return improvement(c[0], c[1]); }

private:
    Vector2 ref_;
    std::vector<double> a_;  // f1 ascending
    std::vector<double> b_;  // f2 strictly descending
    double hv_ = 0.0;
};

/// Feasible non-dominated archive of evaluated designs. Infeasible points
/// are rejected; feasible entries beyond the reference are kept but flagged
/// (they contribute no hypervolume).
class ParetoArchive {
public:
    struct Entry {
        Vector x;
        Vector2 f;
        double g = 0.0;
        bool beyond_reference = false;
    };

    explicit ParetoArchive(const Vector2& reference) : ref_(reference) {}

    /// Returns true if the point entered the archive.
    bool insert(const Vector& x, const Vector2& f, double g);

    const std::vector<Entry>& entries() const { return entries_; }
    std::vector<Vector2> front() const;
    const Vector2& reference() const { return ref_; }
    double hypervolume() const;
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

private:
    Vector2 ref_;
    std::vector<Entry> entries_;
};

}  // namespace mobo
