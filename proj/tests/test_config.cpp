#include <doctest.h>

#include <string>

#include "mobo/config_io.hpp"

using namespace mobo;

namespace {

std::string error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_SUITE_BEGIN("config");

TEST_CASE("empty text yields the defaults") {
    ExperimentFile file = parse_config("");
    ExperimentFile fresh;
    CHECK(canonical_config(file) == canonical_config(fresh));
    CHECK(config_hash(file) == config_hash(fresh));
    CHECK(file.repetitions == 5);
    CHECK(file.external.command.empty());
}

TEST_CASE("every key lands in its field") {
    std::string text = R"(# full experiment description
problem = bnh
workflow = optim2
seed = 99
initial_doe_size = 20
iterations = 5
batch_size = 2
total_budget = 30
refit_every = 3
refit_evals = 64
reference_margin = 0.2
repetitions = 7

[acquisition]
mc_samples = 256
mc_samples_final = 1024
screen = 96
restarts = 4
step_init = 0.3
step_min = 0.01
temperature_scale = 0.002
parego_alpha = 0.07

[gp]
nugget = 2e-8

[kernels]
f1 = exponential
f2 = squaredexponential
g = matern52

[moea]
population = 40
generations = 60
verify_points = 6
crossover_prob = 0.85
crossover_eta = 12
mutation_prob = 0.1
mutation_eta = 25

[external]
command = python3 sim.py --fast
dimension = 4
timeout_seconds = 12.5
max_concurrency = 2
)";
    ExperimentFile file = parse_config(text);
    const ExperimentConfig& c = file.config;
    CHECK(c.problem == "bnh");
    CHECK(c.workflow == Workflow::Optim2);
    CHECK(c.seed == 99);
    CHECK(c.initial_doe_size == 20);
    CHECK(c.iterations == 5);
    CHECK(c.batch_size == 2);
    CHECK(c.total_budget == 30);
    CHECK(c.refit_every == 3);
    CHECK(c.refit_evals == 64);
    CHECK(c.reference_margin == doctest::Approx(0.2));
    CHECK(file.repetitions == 7);
    CHECK(c.acquisition.mc_samples == 256);
    CHECK(c.acquisition.mc_samples_final == 1024);
    CHECK(c.acquisition.screen == 96);
    CHECK(c.acquisition.restarts == 4);
    CHECK(c.acquisition.step_init == doctest::Approx(0.3));
    CHECK(c.acquisition.step_min == doctest::Approx(0.01));
    CHECK(c.acquisition.temperature_scale == doctest::Approx(0.002));
    CHECK(c.acquisition.parego_alpha == doctest::Approx(0.07));
    CHECK(c.gp.nugget == doctest::Approx(2e-8));
    CHECK(c.kernels.f1 == KernelFamily::Exponential);
    CHECK(c.kernels.f2 == KernelFamily::SquaredExponential);
    CHECK(c.kernels.g == KernelFamily::Matern52);
    CHECK(c.moea.population == 40);
    CHECK(c.moea.generations == 60);
    CHECK(c.moea.verify_points == 6);
    CHECK(c.moea.crossover_prob == doctest::Approx(0.85));
    CHECK(c.moea.crossover_eta == doctest::Approx(12.0));
    CHECK(c.moea.mutation_prob == doctest::Approx(0.1));
    CHECK(c.moea.mutation_eta == doctest::Approx(25.0));
    CHECK(file.external.command == "python3 sim.py --fast");
    CHECK(file.external.dimension == 4);
    CHECK(file.external.timeout_seconds == doctest::Approx(12.5));
    CHECK(file.external.max_concurrency == 2);
    file.validate();

    SUBCASE("the canonical snapshot round-trips exactly") {
        std::string canon = canonical_config(file);
        ExperimentFile back = parse_config(canon);
        CHECK(canonical_config(back) == canon);
        CHECK(config_hash(back) == config_hash(file));
    }
}

TEST_CASE("formatting variations do not change the hash") {
    std::string tight = "seed = 3\niterations = 4\n[gp]\nnugget = 1e-9\n";
    std::string loose =
        "# a comment\n\n  iterations= 4 \n  seed =   3\r\n"
        "[gp]\n   nugget =1e-9\n\n"
        "# another comment\n";
    ExperimentFile a = parse_config(tight);
    ExperimentFile b = parse_config(loose);
    CHECK(config_hash(a) == config_hash(b));

    ExperimentFile c = parse_config(tight);
    c.config.seed = 4;
    CHECK(config_hash(a) != config_hash(c));

    ExperimentFile d = parse_config(tight);
    d.config.gp.nugget = 1.0000001e-9;
    CHECK(config_hash(a) != config_hash(d));
}

TEST_CASE("parse errors name the offending line") {
    CHECK(error_line("problem = bnh\nbogus_key = 1\n") ==
          "config line 2: unknown key bogus_key");
    CHECK(error_line("[turbo]\n") == "config line 1: unknown section [turbo]");
    CHECK(error_line("[gp]\nmc_samples = 3\n") == "config line 2: unknown key gp.mc_samples");
    CHECK(error_line("seed = 1\nseed = 2\n") == "config line 2: duplicate key seed");
    CHECK(error_line("[gp]\nnugget = 1e-9\n[gp]\nnugget = 2e-9\n") ==
          "config line 4: duplicate key gp.nugget");
    CHECK(error_line("iterations = ""twelve\n") ==
          "config line 1: expected an integer, got \"twelve\"");
    CHECK(error_line("just words\n") == "config line 1: expected key = value");
    CHECK(error_line("[moea\n") == "config line 1: unterminated section header");
    CHECK(error_line("workflow = optim9\n").find("config line 1:") == 0);
    CHECK(error_line("[kernels]\nf1 = cubic\n").find("config line 2:") == 0);
    CHECK(error_line(" = 5\n") == "config line 1: missing key before =");
}

TEST_CASE("file-level validation") {
    ExperimentFile file;
    file.repetitions = 0;
    CHECK_THROWS_AS(file.validate(), ConfigError);

    file = ExperimentFile{};
    file.external.command = "python3 sim.py";
    CHECK_THROWS_AS(file.validate(), ConfigError);  // dimension missing
    file.external.dimension = 3;
    file.validate();
    file.external.timeout_seconds = 0.0;
    CHECK_THROWS_AS(file.validate(), ConfigError);
    file.external.timeout_seconds = 10.0;
    file.external.max_concurrency = 0;
    CHECK_THROWS_AS(file.validate(), ConfigError);
}

TEST_CASE("problem binding") {
    ExperimentFile file;
    file.config.problem = "bnh";
    CHECK(file.bind_problem().dimension() == 2);

    file.external.command = "python3 nowhere.py";
    file.external.dimension = 5;
    Problem external = file.bind_problem();
    CHECK(external.dimension() == 5);
    CHECK(external.name() == "external");

    ExperimentFile missing;
    missing.config.problem = "no-such-problem";
    CHECK_THROWS_AS(missing.bind_problem(), InputError);
}

TEST_CASE("load_config rejects unreadable paths") {
    CHECK_THROWS_AS(load_config("/nonexistent/config.txt"), ConfigError);
}

TEST_SUITE_END();
