// Independent reference implementations used only by tests: deliberately
// naive (dense inverses, brute-force scans, Monte-Carlo estimates) so they
// share no code path with the library.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "mobo/kernel.hpp"
#include "mobo/rng.hpp"
#include "mobo/types.hpp"

namespace oracle {

struct DensePrediction {
    double mean;
    double var;
};

// GP posterior at one point via an explicit dense inverse of K + noise I.
inline DensePrediction dense_gp_predict(const mobo::KernelSpec& spec, const mobo::Matrix& X,
                                        const mobo::Vector& y, const mobo::Vector& x) {
    const mobo::Matrix K =
        mobo::kernel_matrix(spec, X) +
        spec.noise_variance * mobo::Matrix::Identity(X.rows(), X.rows());
    const mobo::Matrix Kinv = K.inverse();
    mobo::Vector k(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) k[i] = mobo::kernel_eval(spec, X.row(i), x);
    const double mean = k.dot(Kinv * y);
    const double var = mobo::kernel_eval(spec, x, x) - k.dot(Kinv * k);
    return {mean, var};
}

// Exact draw from a GP prior at the given inputs (dense Cholesky).
inline mobo::Vector gp_prior_sample(const mobo::KernelSpec& spec, const mobo::Matrix& X,
                                    std::uint64_t seed) {
    mobo::Matrix K = mobo::kernel_matrix(spec, X);
    K.diagonal().array() += 1e-10;
    const Eigen::LLT<mobo::Matrix> llt(K);
    mobo::Rng rng(seed);
    mobo::Vector z(X.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return mobo::Matrix(llt.matrixL()) * z;
}

// Standard normal CDF through the error-function series in the C library.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Double-double accumulator (TwoSum compensation). The inclusion-exclusion
// sum below alternates signs over up to 2^20 terms, which plain doubles
// cannot carry to 1e-10 relative; the compensated form can.
class DdSum {
public:
    void add(double x) {
        const double s = hi_ + x;
        const double bb = s - hi_;
        lo_ += (hi_ - (s - bb)) + (x - bb);
        hi_ = s;
    }
    double value() const { return hi_ + lo_; }

private:
    double hi_ = 0.0;
    double lo_ = 0.0;
};

// 2-D hypervolume as the literal inclusion-exclusion sum over all nonempty
// subsets of the boxes [p, ref]. Exponential in the front size; callers keep
// m <= 20 or so.
inline double hv_inclusion_exclusion(const std::vector<mobo::Vector2>& front,
                                     const mobo::Vector2& ref) {
    std::vector<mobo::Vector2> pts;
    for (const auto& p : front)
        if (p[0] <= ref[0] && p[1] <= ref[1]) pts.push_back(p);
    const auto m = pts.size();
    DdSum total;
    struct Frame {
        std::size_t next;
        double m1, m2;
        double sign;
    };
    std::vector<Frame> stack;
    for (std::size_t i = 0; i < m; ++i) stack.push_back({i, -1e300, -1e300, +1.0});
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        const double m1 = std::max(f.m1, pts[f.next][0]);
        const double m2 = std::max(f.m2, pts[f.next][1]);
        total.add(f.sign * (ref[0] - m1) * (ref[1] - m2));
        for (std::size_t j = f.next + 1; j < m; ++j) stack.push_back({j, m1, m2, -f.sign});
    }
    return total.value();
}

// Exact union-of-boxes area by coordinate compression: a grid cell is
// dominated iff some point sits weakly below-left of it. O(m^3), any size.
inline double hv_grid_exact(const std::vector<mobo::Vector2>& front, const mobo::Vector2& ref) {
    std::vector<mobo::Vector2> pts;
    for (const auto& p : front)
        if (p[0] <= ref[0] && p[1] <= ref[1]) pts.push_back(p);
    if (pts.empty()) return 0.0;
    std::vector<double> xs{ref[0]}, ys{ref[1]};
    for (const auto& p : pts) {
        xs.push_back(p[0]);
        ys.push_back(p[1]);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
            bool covered = false;
            for (const auto& p : pts)
                if (p[0] <= xs[i] && p[1] <= ys[j]) {
                    covered = true;
                    break;
                }
            if (covered) area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
        }
    return area;
}

// Monte-Carlo rasterization of the dominated area within [lo, ref].
struct McEstimate {
    double value;
    double stderr_;
};

inline McEstimate hv_mc_rasterize(const std::vector<mobo::Vector2>& front,
                                  const mobo::Vector2& ref, const mobo::Vector2& lo,
                                  long samples, std::uint64_t seed) {
    mobo::Rng rng(seed);
    const double area = (ref[0] - lo[0]) * (ref[1] - lo[1]);
    long hits = 0;
    for (long s = 0; s < samples; ++s) {
        const double u = rng.uniform(lo[0], ref[0]);
        const double v = rng.uniform(lo[1], ref[1]);
        for (const auto& p : front)
            if (p[0] <= u && p[1] <= v) {
                ++hits;
                break;
            }
    }
    const double frac = static_cast<double>(hits) / static_cast<double>(samples);
    return {area * frac, area * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples))};
}

}  // namespace oracle
