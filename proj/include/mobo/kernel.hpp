#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "mobo/types.hpp"

namespace mobo {

enum class KernelFamily { Matern52, Exponential, SquaredExponential };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

/// Stationary ARD kernel: family, per-dimension lengthscales, signal
/// variance, and a nugget added to the training diagonal.
struct KernelSpec {
    KernelFamily family = KernelFamily::Matern52;
    Vector lengthscales;
    double signal_variance = 1.0;
    double noise_variance = 0.0;

    int dimension() const { return static_cast<int>(lengthscales.size()); }
    void validate() const;

    static KernelSpec isotropic(KernelFamily family, int d, double lengthscale,
                                double signal_variance = 1.0, double noise_variance = 0.0);
};

/// Correlation (unit signal variance) as a function of the ARD-scaled
/// squared distance r2 = sum_j ((x_j - y_j) / l_j)^2.
inline double correlation(KernelFamily family, double r2) {
    switch (family) {
        case KernelFamily::Matern52: {
            static const double SQRT5 = std::sqrt(5.0);
            const double r = std::sqrt(r2);
            return (1.0 + SQRT5 * r + (5.0 / 3.0) * r2) * std::exp(-SQRT5 * r);
        }
        case KernelFamily::Exponential:
            return std::exp(-std::sqrt(r2));
        case KernelFamily::SquaredExponential:
        default:
            return std::exp(-0.5 * r2);
    }
}

/// k(x, y); equals signal_variance at x = y.
double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& y);

/// n x n kernel matrix over rows of X (no nugget on the diagonal).
Matrix kernel_matrix(const KernelSpec& spec, const Matrix& X);

/// n x m cross-kernel between rows of X and rows of Z.
Matrix kernel_cross(const KernelSpec& spec, const Matrix& X, const Matrix& Z);

}  // namespace mobo
