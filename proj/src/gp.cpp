#include "mobo/gp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "mobo/doe.hpp"
#include "mobo/rng.hpp"

namespace mobo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Posterior variance below these floors is numerical round-off, not signal:
// relative to the kernel's own variance, and relative to the (standardized)
// target scale. Clamping to exactly 0 keeps deterministic-limit paths exact.
constexpr double kRelVarFloor = 1e-10;
constexpr double kAbsVarFloor = 1e-24;

struct Standardization {
    Vector ys;
    double mean;
    double scale;
};

Standardization standardize(const Vector& y) {
    const double m = y.mean();
    const auto n = y.size();
    double s = 1.0;
    if (n > 1) {
        const double var = (y.array() - m).square().sum() / static_cast<double>(n - 1);
        s = std::sqrt(var);
        if (!(s > 1e-12)) s = 1.0;
    }
    return {((y.array() - m) / s).matrix(), m, s};
}

// Cholesky with escalating diagonal regularization (relative to the mean
// diagonal): 1e-10, x10 per retry, up to 1e-4, then give up.
std::pair<Matrix, double> cholesky_with_jitter(const Matrix& K) {
    const double scale = K.diagonal().mean();
    Eigen::LLT<Matrix> llt(K);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), 0.0};
    for (double rel = 1e-10; rel < 1.5e-4; rel *= 10.0) {
        Matrix Kj = K;
        Kj.diagonal().array() += rel * scale;
        llt.compute(Kj);
        if (llt.info() == Eigen::Success) return {llt.matrixL(), rel * scale};
    }
    throw NumericalError("covariance factorization failed after maximal jitter escalation");
}

// Negative log marginal likelihood with the signal variance profiled out:
// sigma2 = y'R^{-1}y / n at the optimum, leaving a search over lengthscales.
struct ProfilePoint {
    double nll = kInf;
    double sigma2 = 1.0;
    bool ok = false;
};

ProfilePoint profile_nll(const Matrix& X, const Vector& ys, KernelFamily family,
                         const Vector& log_ell, double nugget) {
    KernelSpec spec;
    spec.family = family;
    spec.lengthscales = log_ell.array().exp();
    spec.signal_variance = 1.0;
    Matrix R = kernel_matrix(spec, X);
    R.diagonal().array() += nugget;
    Eigen::LLT<Matrix> llt(std::move(R));
    if (llt.info() != Eigen::Success) return {};
    const Vector beta = llt.matrixL().solve(ys);
    const double n = static_cast<double>(ys.size());
    const double sigma2 = std::max(beta.squaredNorm() / n, 1e-12);
    const double log_det_half = llt.matrixLLT().diagonal().array().log().sum();
    return {0.5 * n * std::log(sigma2) + log_det_half, sigma2, true};
}

struct SearchResult {
    Vector log_ell;
    double nll = kInf;
    double sigma2 = 1.0;
};

// Coordinate-wise pattern search over log-lengthscales within the box.
SearchResult compass_refine(const Matrix& X, const Vector& ys, KernelFamily family,
                            SearchResult at, const FitOptions& opt) {
    const auto d = at.log_ell.size();
    const double lo = std::log(opt.ell_lo), hi = std::log(opt.ell_hi);
    int evals = 0;
    double step = opt.step_init;
    while (step >= opt.step_min && evals < opt.refine_evals) {
        SearchResult best = at;
        for (Eigen::Index j = 0; j < d && evals < opt.refine_evals; ++j) {
            for (double sgn : {1.0, -1.0}) {
                Vector cand = at.log_ell;
                cand[j] = std::clamp(cand[j] + sgn * step, lo, hi);
                if (cand[j] == at.log_ell[j]) continue;
                const ProfilePoint p = profile_nll(X, ys, family, cand, opt.nugget);
                ++evals;
                if (p.ok && p.nll < best.nll) best = {cand, p.nll, p.sigma2};
            }
        }
        if (best.nll < at.nll)
            at = best;
        else
            step *= 0.5;
    }
    return at;
}

}  // namespace

GaussianProcessModel GaussianProcessModel::build(const Matrix& X, const Vector& y,
                                                 KernelSpec spec, bool standardize_targets) {
    if (X.rows() != y.size()) throw InputError("gp: inputs/targets size mismatch");
    if (X.cols() != spec.dimension()) throw InputError("gp: input dimension mismatch");
    spec.validate();

    GaussianProcessModel m;
    m.X_ = X;
    if (standardize_targets) {
        auto st = standardize(y);
        m.ys_ = std::move(st.ys);
        m.t_mean_ = st.mean;
        m.t_scale_ = st.scale;
    } else {
        m.ys_ = y;
    }

    Matrix K = kernel_matrix(spec, X);
    K.diagonal().array() += spec.noise_variance;
    auto [L, jitter] = cholesky_with_jitter(K);
    spec.noise_variance += jitter;  // keep L L' = K + noise I exact
    m.spec_ = std::move(spec);
    m.L_ = std::move(L);
    m.alpha_ = m.L_.triangularView<Eigen::Lower>().solve(m.ys_);
    m.L_.triangularView<Eigen::Lower>().adjoint().solveInPlace(m.alpha_);
    return m;
}

GaussianProcessModel GaussianProcessModel::fit(const Matrix& X, const Vector& y,
                                               KernelFamily family, const FitOptions& opt) {
    if (X.rows() < 2) throw InputError("gp: need at least 2 training points");
    const auto d = X.cols();
    const auto st = standardize(y);

    std::vector<Vector> starts;
    starts.emplace_back(Vector::Zero(d));  // unit lengthscales
    const double lo = std::log(opt.ell_lo), hi = std::log(opt.ell_hi);
    if (opt.starts == 2) {
        starts.emplace_back(Vector::Constant(d, 0.5 * (lo + hi)));
    } else if (opt.starts > 2) {
        const Design plan = lhs_maximin(opt.starts - 1, static_cast<int>(d), 0xd0e5eedULL);
        for (Eigen::Index i = 0; i < plan.points.rows(); ++i)
            starts.emplace_back((lo + (hi - lo) * plan.points.row(i).transpose().array()).matrix());
    }

    std::vector<SearchResult> screened;
    screened.reserve(starts.size());
    for (const auto& s : starts) {
        const ProfilePoint p = profile_nll(X, st.ys, family, s, opt.nugget);
        if (p.ok) screened.push_back({s, p.nll, p.sigma2});
    }
    if (screened.empty())
        throw NumericalError("gp fit: no likelihood evaluation succeeded at any start");
    std::stable_sort(screened.begin(), screened.end(),
                     [](const auto& a, const auto& b) { return a.nll < b.nll; });

    SearchResult best = screened.front();
    const int refine = std::min<int>(opt.refine_top, static_cast<int>(screened.size()));
    for (int i = 0; i < refine; ++i) {
        const SearchResult r = compass_refine(X, st.ys, family, screened[i], opt);
        if (r.nll < best.nll) best = r;
    }

    KernelSpec spec;
    spec.family = family;
    spec.lengthscales = best.log_ell.array().exp();
    spec.signal_variance = best.sigma2;
    spec.noise_variance = best.sigma2 * opt.nugget;
    auto model = build(X, y, std::move(spec), true);
    return model;
}

GaussianProcessModel GaussianProcessModel::fit_fixed(const Matrix& X, const Vector& y,
                                                     KernelSpec spec) {
    return build(X, y, std::move(spec), false);
}

GaussianProcessModel GaussianProcessModel::fit_profiled(const Matrix& X, const Vector& y,
                                                        KernelFamily family,
                                                        const Vector& lengthscales,
                                                        const FitOptions& opt) {
    const auto st = standardize(y);
    const Vector log_ell = lengthscales.array().log();
    const ProfilePoint p = profile_nll(X, st.ys, family, log_ell, opt.nugget);
    if (!p.ok)
        throw NumericalError("gp fit: likelihood evaluation failed at the given lengthscales");
    KernelSpec spec;
    spec.family = family;
    spec.lengthscales = log_ell.array().exp();
    spec.signal_variance = p.sigma2;
    spec.noise_variance = p.sigma2 * opt.nugget;
    return build(X, y, std::move(spec), true);
}

GaussianProcessModel GaussianProcessModel::refit(const Matrix& X, const Vector& y,
                                                 const FitOptions& opt) const {
    const auto st = standardize(y);
    SearchResult warm;
    warm.log_ell = spec_.lengthscales.array().log();
    const ProfilePoint p = profile_nll(X, st.ys, spec_.family, warm.log_ell, opt.nugget);
    if (p.ok) {
        warm.nll = p.nll;
        warm.sigma2 = p.sigma2;
    }
    if (opt.refine_evals > 0) warm = compass_refine(X, st.ys, spec_.family, warm, opt);

    KernelSpec spec;
    spec.family = spec_.family;
    spec.lengthscales = warm.log_ell.array().exp();
    spec.signal_variance = warm.sigma2;
    spec.noise_variance = warm.sigma2 * opt.nugget;
    return build(X, y, std::move(spec), true);
}

void GaussianProcessModel::predict(const Matrix& Xq, Vector& mean, Vector& variance) const {
    if (Xq.cols() != dimension()) throw InputError("gp predict: dimension mismatch");
    const Matrix Kx = kernel_cross(spec_, X_, Xq);           // n x m
    mean = ((Kx.transpose() * alpha_).array() * t_scale_ + t_mean_).matrix();
    Matrix V = Kx;
    L_.triangularView<Eigen::Lower>().solveInPlace(V);
    variance.resize(Xq.rows());
    const double s2 = spec_.signal_variance;
    for (Eigen::Index i = 0; i < Xq.rows(); ++i) {
        double v = s2 - V.col(i).squaredNorm();
        if (v < kRelVarFloor * s2 || v < kAbsVarFloor) v = 0.0;
        variance[i] = v * t_scale_ * t_scale_;
    }
}

Prediction GaussianProcessModel::predict(const Vector& x) const {
    Vector mean, var;
    predict(Matrix(x.transpose()), mean, var);
    return {mean[0], var[0]};
}

Vector GaussianProcessModel::predict_mean(const Matrix& Xq) const {
    if (Xq.cols() != dimension()) throw InputError("gp predict: dimension mismatch");
    const Matrix Kx = kernel_cross(spec_, X_, Xq);
    return ((Kx.transpose() * alpha_).array() * t_scale_ + t_mean_).matrix();
}

GaussianProcessModel GaussianProcessModel::condition_on_virtual(const Vector& x_new,
                                                                double y_virtual) const {
    if (x_new.size() != dimension()) throw InputError("gp condition: dimension mismatch");
    const auto n = X_.rows();

    const Matrix kx = kernel_cross(spec_, X_, Matrix(x_new.transpose()));  // n x 1
    Vector c = kx.col(0);
    L_.triangularView<Eigen::Lower>().solveInPlace(c);
    const double kxx = spec_.signal_variance + spec_.noise_variance;
    double d2 = kxx - c.squaredNorm();
    // A duplicate of an existing input makes the extended matrix singular;
    // a local jitter on the new diagonal entry keeps the factor usable.
    const double floor = 1e-10 * spec_.signal_variance;
    if (d2 < floor) d2 = floor;

    GaussianProcessModel m;
    m.X_.resize(n + 1, X_.cols());
    m.X_ << X_, x_new.transpose();
    m.ys_.resize(n + 1);
    m.ys_ << ys_, (y_virtual - t_mean_) / t_scale_;
    m.t_mean_ = t_mean_;
    m.t_scale_ = t_scale_;
    m.spec_ = spec_;
    m.L_ = Matrix::Zero(n + 1, n + 1);
    m.L_.topLeftCorner(n, n) = L_;
    m.L_.row(n).head(n) = c.transpose();
    m.L_(n, n) = std::sqrt(d2);
    m.alpha_ = m.L_.triangularView<Eigen::Lower>().solve(m.ys_);
    m.L_.triangularView<Eigen::Lower>().adjoint().solveInPlace(m.alpha_);
    return m;
}

double GaussianProcessModel::sample_posterior(const Vector& x, std::uint64_t seed) const {
    const Prediction p = predict(x);
    if (p.variance <= 0.0) return p.mean;
    Rng rng(seed);
    return p.mean + std::sqrt(p.variance) * rng.normal();
}

double GaussianProcessModel::log_marginal_likelihood() const {
    const double n = static_cast<double>(ys_.size());
    const double quad = ys_.dot(alpha_);
    const double log_det_half = L_.diagonal().array().log().sum();
    return -0.5 * quad - log_det_half - 0.5 * n * std::log(2.0 * M_PI);
}

Vector GaussianProcessModel::loo_residuals() const {
    const auto n = X_.rows();
    Matrix Kinv = Matrix::Identity(n, n);
    L_.triangularView<Eigen::Lower>().solveInPlace(Kinv);
    L_.triangularView<Eigen::Lower>().adjoint().solveInPlace(Kinv);
    Vector r(n);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = t_scale_ * alpha_[i] / Kinv(i, i);
    return r;
}

}  // namespace mobo
