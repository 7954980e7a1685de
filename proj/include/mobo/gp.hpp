#pragma once

#include <cstdint>

#include "mobo/kernel.hpp"

namespace mobo {

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

/// Controls for the marginal-likelihood search. Signal variance is profiled
/// out analytically, so the search runs over log-lengthscales only, with the
/// noise fixed as a nugget relative to the signal variance.
struct FitOptions {
    double nugget = 1e-8;      // K = signal * (R + nugget * I)
    int starts = 8;            // 1 at unit lengthscales + space-filling rest
    int refine_top = 2;        // screened starts that get local refinement
    int refine_evals = 160;    // likelihood-evaluation budget per refined start
    double step_init = 0.5;    // compass step in log-lengthscale space
    double step_min = 0.02;
    double ell_lo = 0.05;      // lengthscale search box
    double ell_hi = 5.0;
};

/// GP regression model with a constant mean, standardized targets, and a
/// Cholesky-factorized covariance. Immutable after construction; conditioning
/// returns a new model.
class GaussianProcessModel {
public:
    /// Maximize the log marginal likelihood over lengthscales (multi-start
    /// compass search); signal variance is set to its closed-form optimum.
    static GaussianProcessModel fit(const Matrix& X, const Vector& y, KernelFamily family,
                                    const FitOptions& opt = {});

    /// Build with the given hyperparameters as-is, in target units: no
    /// standardization and no likelihood search.
    static GaussianProcessModel fit_fixed(const Matrix& X, const Vector& y, KernelSpec spec);

    /// Standardized fit keeping the given lengthscales: one likelihood
    /// profile for the signal variance, no search. A warm refit on grown
    /// data and a checkpoint resume both go through here, so the two paths
    /// produce bit-identical models.
    static GaussianProcessModel fit_profiled(const Matrix& X, const Vector& y,
                                             KernelFamily family, const Vector& lengthscales,
                                             const FitOptions& opt = {});

    /// Refit on (typically grown) data, warm-started from this model's
    /// lengthscales. refine_evals = 0 keeps the lengthscales and only
    /// re-profiles the signal variance against the new data.
    GaussianProcessModel refit(const Matrix& X, const Vector& y, const FitOptions& opt) const;

    Prediction predict(const Vector& x) const;
    /// Batched prediction over rows of X.
    void predict(const Matrix& X, Vector& mean, Vector& variance) const;
    /// Posterior means only (skips the variance solve).
    Vector predict_mean(const Matrix& X) const;

    /// Condition on one virtual observation without re-fitting
    /// hyperparameters; the factor is extended incrementally.
    GaussianProcessModel condition_on_virtual(const Vector& x_new, double y_virtual) const;

    /// Draw from Normal(mean, variance) at x; deterministic under the seed.
    double sample_posterior(const Vector& x, std::uint64_t seed) const;

    /// Log marginal likelihood of the (standardized) training targets.
    double log_marginal_likelihood() const;

    /// Leave-one-out residuals y_i - mu_{-i}(x_i) in original target units.
    Vector loo_residuals() const;

    const KernelSpec& kernel() const { return spec_; }
    const Matrix& training_inputs() const { return X_; }
    /// Training targets in original units.
    Vector training_targets() const { return (ys_.array() * t_scale_ + t_mean_).matrix(); }
    double target_mean() const { return t_mean_; }
    double target_scale() const { return t_scale_; }
    /// Lower-triangular factor of K + noise * I (standardized units).
    const Matrix& covariance_factor() const { return L_; }
    int dimension() const { return static_cast<int>(X_.cols()); }
    int size() const { return static_cast<int>(X_.rows()); }

private:
    GaussianProcessModel() = default;
    static GaussianProcessModel build(const Matrix& X, const Vector& y, KernelSpec spec,
                                      bool standardize_targets);

    Matrix X_;       // n x d training inputs
    Vector ys_;      // standardized targets
    double t_mean_ = 0.0;
    double t_scale_ = 1.0;
    KernelSpec spec_;  // standardized units; noise includes any jitter applied
    Matrix L_;
    Vector alpha_;   // (K + noise I)^{-1} ys
};

}  // namespace mobo
