#include "mobo/doe.hpp"

#include <limits>
#include <vector>

#include "mobo/rng.hpp"

namespace mobo {

double maximin_score(const Matrix& points) {
    if (points.rows() < 2) throw InputError("maximin_score: need at least 2 points");
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        for (Eigen::Index j = i + 1; j < points.rows(); ++j)
            best = std::min(best, (points.row(i) - points.row(j)).squaredNorm());
    return std::sqrt(best);
}

namespace {

Matrix stratified_points(int n, int d, Rng& rng) {
    Matrix pts(n, d);
    for (int j = 0; j < d; ++j) {
        const auto perm = rng.permutation(n);
        for (int i = 0; i < n; ++i) pts(i, j) = (perm[static_cast<std::size_t>(i)] + 0.5) / n;
    }
    return pts;
}

// Book-keeping for fast swap proposals: squared distance matrix plus each
// row's nearest neighbour. A swap of rows a,b in one column only changes
// distances touching a or b, so a proposal is scored in O(n); the global
// minimum is maintained across accepted swaps.
class MaximinState {
public:
    explicit MaximinState(const Matrix& pts) : pts_(pts), n_(pts.rows()) {
        d2_.resize(n_, n_);
        d2_.setZero();
        for (Eigen::Index i = 0; i < n_; ++i)
            for (Eigen::Index j = i + 1; j < n_; ++j)
                d2_(i, j) = d2_(j, i) = (pts_.row(i) - pts_.row(j)).squaredNorm();
        rowmin_.assign(static_cast<std::size_t>(n_), 0.0);
        rowarg_.assign(static_cast<std::size_t>(n_), 0);
        for (Eigen::Index i = 0; i < n_; ++i) rescan_row(i);
        recompute_global();
    }

    double global_min() const { return gmin_; }
    const Matrix& points() const { return pts_; }

    // Accept iff the swap does not decrease the global minimum distance.
    bool try_swap(Eigen::Index a, Eigen::Index b, Eigen::Index col) {
        const double va = pts_(a, col), vb = pts_(b, col);
        double newmin_ab = std::numeric_limits<double>::infinity();
        na_.resize(static_cast<std::size_t>(n_));
        nb_.resize(static_cast<std::size_t>(n_));
        for (Eigen::Index k = 0; k < n_; ++k) {
            if (k == a || k == b) continue;
            const double pk = pts_(k, col);
            const double da = d2_(a, k) - (va - pk) * (va - pk) + (vb - pk) * (vb - pk);
            const double db = d2_(b, k) - (vb - pk) * (vb - pk) + (va - pk) * (va - pk);
            na_[static_cast<std::size_t>(k)] = da;
            nb_[static_cast<std::size_t>(k)] = db;
            newmin_ab = std::min({newmin_ab, da, db});
        }
        newmin_ab = std::min(newmin_ab, d2_(a, b));  // |x_a - x_b| is unchanged by the swap
        if (newmin_ab < gmin_) return false;

        pts_(a, col) = vb;
        pts_(b, col) = va;
        for (Eigen::Index k = 0; k < n_; ++k) {
            if (k == a || k == b) continue;
            d2_(a, k) = d2_(k, a) = na_[static_cast<std::size_t>(k)];
            d2_(b, k) = d2_(k, b) = nb_[static_cast<std::size_t>(k)];
        }
        for (Eigen::Index k = 0; k < n_; ++k) {
            if (k == a || k == b) {
                rescan_row(k);
                continue;
            }
            auto& rm = rowmin_[static_cast<std::size_t>(k)];
            auto& ra = rowarg_[static_cast<std::size_t>(k)];
            if (ra == a || ra == b) {
                const double cand = std::min(d2_(k, a), d2_(k, b));
                if (cand <= rm) {
                    rm = cand;
                    ra = d2_(k, a) <= d2_(k, b) ? a : b;
                } else {
                    rescan_row(k);
                }
            } else {
                if (d2_(k, a) < rm) { rm = d2_(k, a); ra = a; }
                if (d2_(k, b) < rm) { rm = d2_(k, b); ra = b; }
            }
        }
        recompute_global();
        return true;
    }

private:
    void rescan_row(Eigen::Index k) {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index arg = k == 0 ? 1 : 0;
        for (Eigen::Index j = 0; j < n_; ++j) {
            if (j == k) continue;
            if (d2_(k, j) < best) { best = d2_(k, j); arg = j; }
        }
        rowmin_[static_cast<std::size_t>(k)] = best;
        rowarg_[static_cast<std::size_t>(k)] = arg;
    }

    void recompute_global() {
        gmin_ = std::numeric_limits<double>::infinity();
        for (const double v : rowmin_) gmin_ = std::min(gmin_, v);
    }

    Matrix pts_;
    Eigen::Index n_;
    Matrix d2_;
    std::vector<double> rowmin_;
    std::vector<Eigen::Index> rowarg_;
    std::vector<double> na_, nb_;
    double gmin_ = 0.0;
};

}  // namespace

Design lhs_basic(int n, int d, std::uint64_t seed) {
    if (n < 2) throw InputError("lhs: need at least 2 points");
    if (d < 1) throw InputError("lhs: dimension must be >= 1");
    Rng rng(stream_seed(seed, "lhs"));
    Design design;
    design.points = stratified_points(n, d, rng);
    design.seed = seed;
    design.maximin_distance = maximin_score(design.points);
    return design;
}

Design lhs_maximin(int n, int d, std::uint64_t seed, long proposals) {
    Design design = lhs_basic(n, d, seed);
    if (proposals < 0) proposals = 10000L * d;

    Rng rng(stream_seed(seed, "lhs-maximin"));
    MaximinState state(design.points);
    for (long it = 0; it < proposals; ++it) {
        const auto col = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(d)));
        const auto a = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
        auto b = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - 1)));
        if (b >= a) ++b;
        state.try_swap(a, b, col);
    }
    design.points = state.points();
    design.maximin_distance = std::sqrt(state.global_min());
    return design;
}

}  // namespace mobo
