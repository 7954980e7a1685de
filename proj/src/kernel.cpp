#include "mobo/kernel.hpp"

#include <cctype>

namespace mobo {

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::Matern52: return "matern52";
        case KernelFamily::Exponential: return "exponential";
        case KernelFamily::SquaredExponential: return "squaredexponential";
    }
    return "matern52";
}

KernelFamily kernel_family_from_string(std::string_view name) {
    std::string s(name);
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "matern52" || s == "matern5/2") return KernelFamily::Matern52;
    if (s == "exponential" || s == "matern12") return KernelFamily::Exponential;
    if (s == "squaredexponential" || s == "se" || s == "rbf" || s == "gaussian")
        return KernelFamily::SquaredExponential;
    throw InputError("unknown kernel family: " + std::string(name));
}

void KernelSpec::validate() const {
    if (lengthscales.size() == 0) throw InputError("kernel: no lengthscales");
    if ((lengthscales.array() <= 0.0).any() || !lengthscales.allFinite())
        throw InputError("kernel: lengthscales must be positive and finite");
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
        throw InputError("kernel: signal_variance must be positive");
    if (noise_variance < 0.0 || !std::isfinite(noise_variance))
        throw InputError("kernel: noise_variance must be non-negative");
}

KernelSpec KernelSpec::isotropic(KernelFamily family, int d, double lengthscale,
                                 double signal_variance, double noise_variance) {
    KernelSpec spec;
    spec.family = family;
    spec.lengthscales = Vector::Constant(d, lengthscale);
    spec.signal_variance = signal_variance;
    spec.noise_variance = noise_variance;
    spec.validate();
    return spec;
}

double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& y) {
    if (x.size() != spec.dimension() || y.size() != spec.dimension())
        throw InputError("kernel_eval: point dimension does not match lengthscales");
    const double r2 = ((x - y).array() / spec.lengthscales.array()).square().sum();
    return spec.signal_variance * correlation(spec.family, r2);
}

namespace {

// Scaled squared distances between rows of A and rows of B.
Matrix scaled_sqdist(const KernelSpec& spec, const Matrix& A, const Matrix& B) {
    const Matrix As = A * spec.lengthscales.cwiseInverse().asDiagonal();
    const Matrix Bs = B * spec.lengthscales.cwiseInverse().asDiagonal();
    const Vector a2 = As.rowwise().squaredNorm();
    const Vector b2 = Bs.rowwise().squaredNorm();
    Matrix D2 = -2.0 * As * Bs.transpose();
    D2.colwise() += a2;
    D2.rowwise() += b2.transpose();
    return D2.cwiseMax(0.0);
}

Matrix apply_correlation(KernelFamily family, Matrix&& D2, double signal) {
    for (Eigen::Index j = 0; j < D2.cols(); ++j)
        for (Eigen::Index i = 0; i < D2.rows(); ++i)
            D2(i, j) = signal * correlation(family, D2(i, j));
    return std::move(D2);
}

}  // namespace

Matrix kernel_matrix(const KernelSpec& spec, const Matrix& X) {
    if (X.cols() != spec.dimension())
        throw InputError("kernel_matrix: input dimension does not match lengthscales");
    Matrix K = apply_correlation(spec.family, scaled_sqdist(spec, X, X), spec.signal_variance);
    K.diagonal().setConstant(spec.signal_variance);  // exact zero-distance value
    return K;
}

Matrix kernel_cross(const KernelSpec& spec, const Matrix& X, const Matrix& Z) {
    if (X.cols() != spec.dimension() || Z.cols() != spec.dimension())
        throw InputError("kernel_cross: input dimension does not match lengthscales");
    return apply_correlation(spec.family, scaled_sqdist(spec, X, Z), spec.signal_variance);
}

}  // namespace mobo
