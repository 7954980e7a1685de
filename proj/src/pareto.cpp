#include "mobo/pareto.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace mobo {

bool dominates(const Vector2& a, const Vector2& b) {
    return a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1]);
}

std::vector<int> non_dominated_filter(const std::vector<Vector2>& points) {
    const auto n = points.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        const auto& p = points[static_cast<std::size_t>(i)];
        const auto& q = points[static_cast<std::size_t>(j)];
        if (p[0] != q[0]) return p[0] < q[0];
        if (p[1] != q[1]) return p[1] < q[1];
        return i < j;
    });

    std::vector<char> keep(n, 0);
    double best_f2 = std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    while (i < n) {
        // Group of equal f1: the lowest f2 survives if it beats every point
        // with strictly smaller f1; exact duplicates survive with it.
        std::size_t j = i;
        const auto& head = points[static_cast<std::size_t>(order[i])];
        while (j < n && points[static_cast<std::size_t>(order[j])][0] == head[0]) ++j;
        if (head[1] < best_f2) {
            keep[static_cast<std::size_t>(order[i])] = 1;
            for (std::size_t k = i + 1; k < j; ++k)
                if (points[static_cast<std::size_t>(order[k])][1] == head[1])
                    keep[static_cast<std::size_t>(order[k])] = 1;
            best_f2 = head[1];
        }
        i = j;
    }

    std::vector<int> out;
    for (std::size_t k = 0; k < n; ++k)
        if (keep[k]) out.push_back(static_cast<int>(k));
    return out;
}

namespace {

// Reduce to the staircase inside the reference box: f1 strictly ascending,
// f2 strictly descending, duplicates and dominated points removed.
std::pair<std::vector<double>, std::vector<double>> staircase(const std::vector<Vector2>& front,
                                                              const Vector2& ref) {
    std::vector<Vector2> in_box;
    in_box.reserve(front.size());
    for (const auto& p : front)
        if (p[0] <= ref[0] && p[1] <= ref[1]) in_box.push_back(p);
    std::sort(in_box.begin(), in_box.end(), [](const Vector2& p, const Vector2& q) {
        return p[0] != q[0] ? p[0] < q[0] : p[1] < q[1];
    });
    std::vector<double> a, b;
    for (const auto& p : in_box) {
        if (!b.empty() && p[1] >= b.back()) continue;
        a.push_back(p[0]);
        b.push_back(p[1]);
    }
    return {std::move(a), std::move(b)};
}

}  // namespace

double hypervolume_2d(const std::vector<Vector2>& front, const Vector2& ref) {
    const auto [a, b] = staircase(front, ref);
    double hv = 0.0;
    double prev = ref[1];
    for (std::size_t i = 0; i < a.size(); ++i) {
        hv += (ref[0] - a[i]) * (prev - b[i]);
        prev = b[i];
    }
    return hv;
}

double hypervolume_improvement(const std::vector<Vector2>& front, const Vector2& ref,
                               const Vector2& candidate) {
    std::vector<Vector2> extended = front;
    extended.push_back(candidate);
    return hypervolume_2d(extended, ref) - hypervolume_2d(front, ref);
}

HviSurface::HviSurface(const std::vector<Vector2>& front, const Vector2& ref) : ref_(ref) {
    auto [a, b] = staircase(front, ref);
    a_ = std::move(a);
    b_ = std::move(b);
    double prev = ref_[1];
    for (std::size_t i = 0; i < a_.size(); ++i) {
        hv_ += (ref_[0] - a_[i]) * (prev - b_[i]);
        prev = b_[i];
    }
}

double HviSurface::improvement(double f1, double f2) const {
    if (f1 >= ref_[0] || f2 >= ref_[1]) return 0.0;
    const auto k = a_.size();
    // First step strictly right of f1; the envelope before it is the last
    // staircase level at or left of f1 (the reference height if none).
    const auto idx0 = static_cast<std::size_t>(
        std::upper_bound(a_.begin(), a_.end(), f1) - a_.begin());
    double env = idx0 > 0 ? b_[idx0 - 1] : ref_[1];
    double x = f1;
    double area = 0.0;
    for (std::size_t idx = idx0; env > f2; ++idx) {
        const double x_next = idx < k ? a_[idx] : ref_[0];
        area += (x_next - x) * (env - f2);
        if (idx >= k) break;
        x = x_next;
        env = b_[idx];
    }
    return area;
}

bool ParetoArchive::insert(const Vector& x, const Vector2& f, double g) {
    if (g > 0.0) return false;
    for (const auto& e : entries_)
        if (dominates(e.f, f)) return false;
    entries_.erase(std::remove_if(entries_.begin(), entries_.end(),
                                  [&](const Entry& e) { return dominates(f, e.f); }),
                   entries_.end());
    entries_.push_back({x, f, g, f[0] > ref_[0] || f[1] > ref_[1]});
    return true;
}

std::vector<Vector2> ParetoArchive::front() const {
    std::vector<Vector2> f;
    f.reserve(entries_.size());
    for (const auto& e : entries_) f.push_back(e.f);
    return f;
}

double ParetoArchive::hypervolume() const { return hypervolume_2d(front(), ref_); }

}  // namespace mobo
