#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "mobo/pareto.hpp"
#include "mobo/problems.hpp"
#include "mobo/rng.hpp"

using namespace mobo;

namespace {

Matrix random_cube(int n, int d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix U(n, d);
    for (Eigen::Index i = 0; i < U.size(); ++i) U(i) = rng.uniform();
    return U;
}

std::string sim_command(const std::string& args) {
    return "python3 " MOBO_TEST_DIR "/mock_sim.py " + args;
}

template <typename Fn>
std::string error_message(Fn&& fn) {
    try {
        fn();
    } catch (const EvaluationError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_SUITE_BEGIN("problems");

TEST_CASE("variable denormalization is the affine map onto physical bounds") {
    VariableSpec beta{"beta_l1", 10.0, 60.0, "deg", 0.1, 0.9};
    beta.validate();

    SUBCASE("interpolation at the searchable bounds") {
        CHECK(beta.denormalize(0.1) == doctest::Approx(15.0).epsilon(1e-14));
        CHECK(beta.denormalize(0.9) == doctest::Approx(55.0).epsilon(1e-14));
    }
    SUBCASE("full-box variables reach the physical bounds") {
        VariableSpec v{"x", -2.0, 3.0, "-", 0.0, 1.0};
        CHECK(v.denormalize(0.0) == -2.0);
        CHECK(v.denormalize(1.0) == 3.0);
    }
    SUBCASE("out-of-box input is rejected") {
        CHECK_THROWS_AS(beta.denormalize(0.05), InputError);
        CHECK_THROWS_AS(beta.denormalize(0.95), InputError);
        CHECK_THROWS_AS(beta.to_unit(0.0), InputError);
        CHECK_THROWS_AS(beta.from_unit(1.5), InputError);
    }
    SUBCASE("invalid specs are rejected") {
        CHECK_THROWS_AS((VariableSpec{"v", 3.0, 3.0, "-", 0.0, 1.0}.validate()),
                        InputError);
        CHECK_THROWS_AS((VariableSpec{"v", 0.0, 1.0, "-", 0.5, 0.5}.validate()),
                        InputError);
        CHECK_THROWS_AS((VariableSpec{"v", 0.0, 1.0, "-", -0.1, 0.9}.validate()),
                        InputError);
        CHECK_THROWS_AS((VariableSpec{"", 0.0, 1.0, "-", 0.0, 1.0}.validate()),
                        InputError);
    }
}

TEST_CASE("normalization round-trips within 1e-12") {
    Rng rng(77);
    for (int rep = 0; rep < 50; ++rep) {
        VariableSpec v;
        v.name = "v";
        v.min_real = -50.0 + 100.0 * rng.uniform();
        v.max_real = v.min_real + 0.1 + 100.0 * rng.uniform();
        v.min_norm = 0.4 * rng.uniform();
        v.max_norm = v.min_norm + 0.05 + (1.0 - v.min_norm - 0.05) * rng.uniform();
        v.validate();
        for (int k = 0; k < 20; ++k) {
            const double x = v.min_norm + (v.max_norm - v.min_norm) * k / 19.0;
            CHECK(v.normalize(v.denormalize(x)) == doctest::Approx(x).epsilon(1e-12));
            const double u = k / 19.0;
            CHECK(v.to_unit(v.from_unit(u)) == doctest::Approx(u).epsilon(1e-12));
        }
    }
}

TEST_CASE("bnh matches its closed form") {
    Problem bnh = make_problem("bnh");
    REQUIRE(bnh.dimension() == 2);

    SUBCASE("ideal corner of the first objective") {
        Vector u(2);
        u << 0.0, 0.0;
        const Evaluation e = bnh.evaluate(u, EvalSource::Doe);
        CHECK(e.f1 == 0.0);
        CHECK(e.f2 == 50.0);
        CHECK(e.g == 0.0);  // the disc constraint is active at the origin
    }
    SUBCASE("interior point with exactly representable coordinates") {
        Vector u(2);
        u << 0.4, 0.5;  // x = 2, y = 1.5
        const Evaluation e = bnh.evaluate(u, EvalSource::Doe);
        CHECK(e.f1 == 25.0);
        CHECK(e.f2 == 21.25);
        CHECK(e.g == -13.75);
    }
    SUBCASE("same point twice gives identical evaluations") {
        Vector u(2);
        u << 0.3178, 0.9152;
        const Evaluation a = bnh.evaluate(u, EvalSource::Doe);
        const Evaluation b = bnh.evaluate(u, EvalSource::Doe);
        CHECK(a.f1 == b.f1);
        CHECK(a.f2 == b.f2);
        CHECK(a.g == b.g);
    }
}

TEST_CASE("bnh known front is never beaten by sampled designs") {
    Problem bnh = make_problem("bnh");
    REQUIRE(bnh.known_front().has_value());
    const KnownFront& front = *bnh.known_front();

    SUBCASE("envelope values at segment ends") {
        CHECK(front.envelope(0.0) == doctest::Approx(50.0));
        CHECK(front.envelope(72.0) == doctest::Approx(8.0));
        CHECK(front.envelope(136.0) == doctest::Approx(4.0));
        // continuity where the two analytic segments meet
        CHECK(front.envelope(72.0 - 1e-9) ==
              doctest::Approx(front.envelope(72.0 + 1e-9)).epsilon(1e-6));
    }
    SUBCASE("sampled front is ordered and monotone") {
        const Matrix pts = front.sample(101);
        REQUIRE(pts.rows() == 101);
        for (int i = 1; i < 101; ++i) {
            CHECK(pts(i, 0) > pts(i - 1, 0));
            CHECK(pts(i, 1) <= pts(i - 1, 1) + 1e-12);
        }
    }
    SUBCASE("archive from a dense scan stays on or above the envelope") {
        ParetoArchive archive(Vector2(150.0, 60.0));
        const Matrix U = random_cube(4000, 2, 404);
        const auto evals = bnh.evaluate_batch(U, EvalSource::Doe);
        for (const auto& e : evals)
            archive.insert(e.x, Vector2(e.f1, e.f2), e.g);
        REQUIRE(archive.size() > 10);
        for (const auto& f : archive.front())
            CHECK(f[1] >= front.envelope(f[0]) - 1e-6);
    }
}

TEST_CASE("srn matches its closed form") {
    Problem srn = make_problem("srn");
    REQUIRE(srn.dimension() == 2);
    REQUIRE_FALSE(srn.known_front().has_value());

    Vector u(2);
    u << 0.5, 0.5;  // x = 0, y = 0
    Evaluation e = srn.evaluate(u, EvalSource::Doe);
    CHECK(e.f1 == 7.0);
    CHECK(e.f2 == -1.0);
    CHECK(e.g == 10.0);  // the linear constraint is violated at the origin

    u << 0.25, 0.75;  // x = -10, y = 10
    e = srn.evaluate(u, EvalSource::Doe);
    CHECK(e.f1 == 227.0);
    CHECK(e.f2 == -171.0);
    CHECK(e.g == -25.0);
}

TEST_CASE("catalog lists the builtin problems") {
    const auto& names = builtin_problems();
    CHECK(std::find(names.begin(), names.end(), "bnh") != names.end());
    CHECK(std::find(names.begin(), names.end(), "srn") != names.end());
    CHECK(std::find(names.begin(), names.end(), "synrel-toy") != names.end());
    CHECK_THROWS_AS(make_problem("zdt1"), InputError);
}

TEST_CASE("synrel-toy mirrors the rotor design structure") {
    Problem toy = make_problem("synrel-toy");
    REQUIRE(toy.dimension() == 12);

    SUBCASE("variable groups and bounds") {
        const auto& vars = toy.variables();
        CHECK(vars[0].name == "rad_pm_l1");
        CHECK(vars[0].min_norm == 0.6);
        CHECK(vars[0].max_norm == 0.9);
        CHECK(vars[1].min_norm == 0.1);
        CHECK(vars[6].name == "beta_l1");
        CHECK(vars[6].min_real == 10.0);
        CHECK(vars[6].unit == "deg");
        CHECK(vars[11].name == "pm_len_l3");
    }
    SUBCASE("constraint is exactly zero at the dyadic boundary design") {
        Vector u(12);
        u << 9.0 / 16, 9.0 / 16, 9.0 / 16, 0.5, 0.5, 0.5, 5.0 / 16, 5.0 / 16,
            5.0 / 16, 0.5, 0.5, 0.5;
        const Evaluation e = toy.evaluate(u, EvalSource::Doe);
        CHECK(e.g == 0.0);
    }
    SUBCASE("about thirty percent of the cube is infeasible") {
        const Matrix U = random_cube(20000, 12, 909);
        const auto evals = toy.evaluate_batch(U, EvalSource::Doe);
        int infeasible = 0;
        for (const auto& e : evals)
            if (e.g > 0.0) ++infeasible;
        const double frac = infeasible / 20000.0;
        CHECK(frac > 0.27);
        CHECK(frac < 0.33);
    }
    SUBCASE("objectives conflict: no point approaches both minima") {
        const int n = 100000;
        const Matrix U = random_cube(n, 12, 1313);
        const auto evals = toy.evaluate_batch(U, EvalSource::Doe);
        double f1_lo = evals[0].f1, f1_hi = evals[0].f1;
        double f2_lo = evals[0].f2, f2_hi = evals[0].f2;
        int best1 = 0, best2 = 0;
        for (int i = 0; i < n; ++i) {
            if (evals[i].f1 < f1_lo) f1_lo = evals[i].f1, best1 = i;
            f1_hi = std::max(f1_hi, evals[i].f1);
            if (evals[i].f2 < f2_lo) f2_lo = evals[i].f2, best2 = i;
            f2_hi = std::max(f2_hi, evals[i].f2);
        }
        CHECK(best1 != best2);
        const double tol1 = 1e-3 * (f1_hi - f1_lo);
        const double tol2 = 1e-3 * (f2_hi - f2_lo);
        for (int i = 0; i < n; ++i) {
            const bool near_both = evals[i].f1 <= f1_lo + tol1 &&
                                   evals[i].f2 <= f2_lo + tol2;
            CHECK_FALSE(near_both);
        }
        // the best torque designs sit on the infeasible side of the boundary
        CHECK(evals[best1].g > 0.0);
    }
    SUBCASE("denormalized reporting") {
        const Vector u = Vector::Zero(12);
        const Vector x = toy.denormalized(u);
        CHECK(x[0] == doctest::Approx(60.0 + 40.0 * 0.6));   // rad_pm_l1
        CHECK(x[6] == doctest::Approx(10.0 + 50.0 * 0.1));   // beta_l1
        CHECK(x[11] == doctest::Approx(5.0 + 25.0 * 0.1));   // pm_len_l3
    }
}

TEST_CASE("evaluation bookkeeping") {
    Problem bnh = make_problem("bnh");

    SUBCASE("budget counter sums evaluations across copies") {
        CHECK(bnh.evaluations() == 0);
        Vector u(2);
        u << 0.5, 0.5;
        bnh.evaluate(u, EvalSource::Doe);
        const Problem copy = bnh;
        copy.evaluate_batch(random_cube(5, 2, 7), EvalSource::BoIteration, 3);
        CHECK(bnh.evaluations() == 6);
        CHECK(copy.evaluations() == 6);
    }
    SUBCASE("source tags and iteration are carried through") {
        const auto evals =
            bnh.evaluate_batch(random_cube(2, 2, 8), EvalSource::BoIteration, 4);
        CHECK(evals[0].source == EvalSource::BoIteration);
        CHECK(evals[0].iteration == 4);
        CHECK(evals[1].x.size() == 2);
    }
    SUBCASE("designs outside the cube or of wrong dimension are rejected") {
        Vector bad(2);
        bad << 1.2, 0.5;
        CHECK_THROWS_AS(bnh.evaluate(bad, EvalSource::Doe), InputError);
        CHECK_THROWS_AS(bnh.evaluate(Vector::Constant(3, 0.5), EvalSource::Doe),
                        InputError);
    }
    SUBCASE("non-finite evaluator output is an error and never recorded") {
        Problem broken(
            "broken", {{"x", 0.0, 1.0, "-", 0.0, 1.0}},
            [](const Matrix& U, Vector& f1, Vector& f2, Vector& g) {
                f1.setZero(U.rows());
                f2.setConstant(U.rows(), std::numeric_limits<double>::infinity());
                g.setZero(U.rows());
            });
        Vector u(1);
        u << 0.25;
        CHECK_THROWS_AS(broken.evaluate(u, EvalSource::Doe), EvaluationError);
        CHECK(broken.evaluations() == 0);
        try {
            broken.evaluate(u, EvalSource::Doe);
        } catch (const EvaluationError& e) {
            CHECK(e.design.size() == 1);
            CHECK(e.design[0] == 0.25);
        }
    }
}

TEST_CASE("external adapter round-trips through a child process") {
    ExternalOptions opt;
    opt.timeout_seconds = 20.0;
    Problem sim = external_adapter(sim_command("ok"), 2, opt);

    SUBCASE("single evaluation") {
        Vector u(2);
        u << 0.25, 0.75;
        const Evaluation e = sim.evaluate(u, EvalSource::Doe);
        CHECK(e.f1 == 0.25);
        CHECK(e.f2 == 0.75);
        CHECK(e.g == 0.25);
        CHECK(sim.evaluations() == 1);
    }
    SUBCASE("batch keeps row order") {
        Matrix U(3, 2);
        U << 0.125, 0.5, 0.375, 0.5, 0.625, 0.5;
        const auto evals = sim.evaluate_batch(U, EvalSource::BoIteration, 1);
        CHECK(evals[0].f1 == 0.125);
        CHECK(evals[1].f1 == 0.375);
        CHECK(evals[2].f1 == 0.625);
    }
}

TEST_CASE("external adapter runs children concurrently") {
    ExternalOptions opt;
    opt.timeout_seconds = 20.0;
    opt.max_concurrency = 4;
    Problem sim = external_adapter(sim_command("slow 0.4"), 2, opt);
    const auto t0 = std::chrono::steady_clock::now();
    const auto evals = sim.evaluate_batch(random_cube(4, 2, 5), EvalSource::Doe);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    CHECK(evals.size() == 4);
    // four 0.4 s sleeps in parallel finish far sooner than the 1.6 s a
    // serial adapter would need
    CHECK(elapsed < 1.2);
}

TEST_CASE("external adapter surfaces protocol failures") {
    ExternalOptions opt;
    opt.timeout_seconds = 20.0;
    Vector u(2);
    u << 0.25, 0.5;

    SUBCASE("timeout kills the child") {
        ExternalOptions fast = opt;
        fast.timeout_seconds = 0.4;
        Problem sim = external_adapter(sim_command("slow 30"), 2, fast);
        const auto t0 = std::chrono::steady_clock::now();
        const std::string msg =
            error_message([&] { sim.evaluate(u, EvalSource::Doe); });
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        CHECK(msg.find("timed out") != std::string::npos);
        CHECK(elapsed < 5.0);
    }
    SUBCASE("malformed response") {
        Problem sim = external_adapter(sim_command("garbage"), 2, opt);
        CHECK_THROWS_AS(sim.evaluate(u, EvalSource::Doe), EvaluationError);
    }
    SUBCASE("mismatched id") {
        Problem sim = external_adapter(sim_command("wrong-id"), 2, opt);
        const std::string msg =
            error_message([&] { sim.evaluate(u, EvalSource::Doe); });
        CHECK(msg.find("id") != std::string::npos);
    }
    SUBCASE("non-finite response value") {
        Problem sim = external_adapter(sim_command("nonfinite"), 2, opt);
        CHECK_THROWS_AS(sim.evaluate(u, EvalSource::Doe), EvaluationError);
    }
    SUBCASE("nonzero exit status after a valid answer") {
        Problem sim = external_adapter(sim_command("exit3"), 2, opt);
        const std::string msg =
            error_message([&] { sim.evaluate(u, EvalSource::Doe); });
        CHECK(msg.find("status 3") != std::string::npos);
    }
    SUBCASE("exit without answering") {
        Problem sim = external_adapter(sim_command("silent"), 2, opt);
        CHECK_THROWS_AS(sim.evaluate(u, EvalSource::Doe), EvaluationError);
    }
    SUBCASE("unlaunchable command") {
        Problem sim = external_adapter("definitely-not-a-real-command-xyz", 2, opt);
        CHECK_THROWS_AS(sim.evaluate(u, EvalSource::Doe), EvaluationError);
    }
    SUBCASE("failed evaluations carry the design and are not counted") {
        Problem sim = external_adapter(sim_command("garbage"), 2, opt);
        try {
            sim.evaluate(u, EvalSource::Doe);
        } catch (const EvaluationError& e) {
            CHECK(e.design.size() == 2);
            CHECK(e.design[0] == 0.25);
        }
        CHECK(sim.evaluations() == 0);
    }
}

TEST_SUITE_END();
