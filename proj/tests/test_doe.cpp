#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mobo/doe.hpp"
#include "mobo/rng.hpp"

using namespace mobo;

namespace {

bool stratified(const Matrix& pts) {
    const auto n = pts.rows();
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
        std::vector<int> strata(static_cast<std::size_t>(n), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto s = static_cast<long>(std::floor(pts(i, j) * static_cast<double>(n)));
            if (s < 0 || s >= n) return false;
            ++strata[static_cast<std::size_t>(s)];
        }
        for (const int c : strata)
            if (c != 1) return false;
    }
    return true;
}

}  // namespace

TEST_SUITE_BEGIN("doe");

TEST_CASE("maximin score basics") {
    Matrix two(2, 2);
    two << 0.5, 0.5, 0.5, 0.5;
    CHECK(maximin_score(two) == 0.0);
    two << 0.0, 0.0, 1.0, 1.0;
    CHECK(maximin_score(two) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("maximin score equals the exhaustive pairwise scan") {
    Rng rng(5);
    Matrix pts(10, 3);
    for (Eigen::Index i = 0; i < pts.size(); ++i) pts(i) = rng.uniform();
    double best = 1e300;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            if (i != j) best = std::min(best, (pts.row(i) - pts.row(j)).norm());
    CHECK(maximin_score(pts) == doctest::Approx(best).epsilon(1e-14));
}

TEST_CASE("n below 2 is rejected") {
    CHECK_THROWS_AS(lhs_maximin(1, 3, 0), InputError);
    CHECK_THROWS_AS(lhs_maximin(2, 0, 0), InputError);
}

TEST_CASE("two points in one dimension land in separate halves") {
    for (std::uint64_t seed : {0ULL, 1ULL, 17ULL}) {
        const auto design = lhs_maximin(2, 1, seed);
        const double a = design.points.col(0).minCoeff();
        const double b = design.points.col(0).maxCoeff();
        CHECK(a >= 0.0);
        CHECK(a < 0.5);
        CHECK(b >= 0.5);
        CHECK(b < 1.0);
    }
}

TEST_CASE("stratification holds at the protocol sizes") {
    CHECK(stratified(lhs_maximin(250, 12, 7).points));
    CHECK(stratified(lhs_maximin(450, 12, 7).points));
}

TEST_CASE("optimization never decreases the maximin distance") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto base = lhs_basic(40, 6, seed);
        const auto opt = lhs_maximin(40, 6, seed);
        CHECK(opt.maximin_distance >= base.maximin_distance);
        CHECK(stratified(opt.points));
    }
}

TEST_CASE("reported maximin distance matches the points") {
    const auto design = lhs_maximin(30, 4, 3);
    CHECK(design.maximin_distance == doctest::Approx(maximin_score(design.points)).epsilon(1e-12));
}

TEST_CASE("deterministic under a fixed seed") {
    const auto a = lhs_maximin(25, 5, 123);
    const auto b = lhs_maximin(25, 5, 123);
    CHECK((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);
    const auto c = lhs_maximin(25, 5, 124);
    CHECK((a.points - c.points).cwiseAbs().maxCoeff() > 0.0);
}

TEST_SUITE_END();
