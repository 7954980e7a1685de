#include <doctest.h>

#include <cstdlib>
#include <string>
#include <vector>

#include "mobo/artifacts.hpp"
#include "mobo/config_io.hpp"
#include "mobo/pareto.hpp"

using namespace mobo;

namespace {

void add_eval(RunState& s, double a, double b, double f1, double f2, double g,
              EvalSource source, int iteration) {
    Evaluation e;
    e.x = Vector(2);
    e.x << a, b;
    e.f1 = f1;
    e.f2 = f2;
    e.g = g;
    e.source = source;
    e.iteration = iteration;
    s.evaluations.push_back(e);
}

/// Five evaluations, three of them on the feasible front.
RunState bo_state() {
    RunState s;
    s.config.problem = "bnh";
    s.config.workflow = Workflow::Optim3;
    s.config.initial_doe_size = 3;
    s.config.iterations = 1;
    s.config.batch_size = 2;
    s.config.total_budget = 5;
    s.config.seed = 11;
    s.reference_set = true;
    s.reference = Vector2(140.0, 55.0);
    add_eval(s, 0.1, 0.2, 10.0, 30.0, -1.0, EvalSource::Doe, 0);
    add_eval(s, 0.3, 0.4, 5.0, 40.0, -0.5, EvalSource::Doe, 0);
    add_eval(s, 0.5, 0.6, 12.0, 31.0, -2.0, EvalSource::Doe, 0);   // dominated
    add_eval(s, 0.7, 0.8, 4.0, 50.0, 0.5, EvalSource::BoIteration, 1);  // infeasible
    add_eval(s, 0.9, 1.0, 3.0, 45.0, -0.1, EvalSource::BoIteration, 1);
    s.iteration = 1;
    s.hv_log.push_back({0, 3, 1000.0, 3});
    s.hv_log.push_back({1, 5, 1200.0, 4});
    return s;
}

RunState optim1_state() {
    RunState s;
    s.config.problem = "bnh";
    s.config.workflow = Workflow::Optim1;
    s.config.initial_doe_size = 4;
    s.config.iterations = 0;
    s.config.batch_size = 4;
    s.config.total_budget = 4;
    s.config.seed = 3;
    s.reference_set = true;
    s.reference = Vector2(100.0, 60.0);
    add_eval(s, 0.2, 0.2, 20.0, 30.0, -1.0, EvalSource::Doe, 0);
    add_eval(s, 0.4, 0.4, 30.0, 20.0, -1.0, EvalSource::Doe, 0);
    add_eval(s, 0.6, 0.6, 40.0, 10.0, 0.2, EvalSource::Doe, 0);
    add_eval(s, 0.8, 0.6, 50.0, 15.0, -0.2, EvalSource::Doe, 0);
    s.front_designs = Matrix(2, 2);
    s.front_designs << 0.25, 0.3, 0.45, 0.5;
    s.front_objectives = Matrix(2, 2);
    s.front_objectives << 18.0, 32.0, 28.0, 22.0;
    VerificationRecord r1{s.front_designs.row(0), Vector2(18.0, 32.0), Vector2(18.5, 33.0),
                          1.0};
    VerificationRecord r2{s.front_designs.row(1), Vector2(28.0, 22.0), Vector2(27.0, 22.25),
                          1.0};
    s.verification = {r1, r2};
    add_eval(s, 0.25, 0.3, 18.5, 33.0, -0.4, EvalSource::Verification, 0);
    add_eval(s, 0.45, 0.5, 27.0, 22.25, -0.3, EvalSource::Verification, 0);
    s.hv_log.push_back({0, 4, 900.0, 3});
    return s;
}

double reparse(const std::string& text) { return std::strtod(text.c_str(), nullptr); }

/// Rows after the "# config=..." line, parsed as CSV.
std::vector<std::vector<std::string>> body_rows(const std::string& artifact) {
    std::size_t eol = artifact.find('\n');
    REQUIRE(artifact.rfind("# config=", 0) == 0);
    return parse_csv(artifact.substr(eol + 1));
}

ComparisonReport tiny_report() {
    ComparisonReport report;
    report.seeds = {5, 6};
    report.references = {Vector2(1.0, 1.0), Vector2(2.0, 2.0)};
    WorkflowSummary a;
    a.workflow = Workflow::Optim1;
    a.final_hv = {0.5, 0.7};
    a.median_hv = 0.6;
    a.wins = 1;
    Matrix front1(1, 2);
    front1 << -0.25, -0.5;
    Matrix front2(2, 2);
    front2 << 0.125, 0.75, 0.5, 0.25;
    a.fronts = {front1, front2};
    a.trajectories = {{{0, 10, 0.4, 5}}, {{0, 10, 0.6, 7}, {1, 12, 0.7, 8}}};
    WorkflowSummary b = a;
    b.workflow = Workflow::Optim3;
    b.final_hv = {0.6, 0.65};
    b.median_hv = 0.625;
    b.wins = 1;
    report.workflows = {a, b};
    return report;
}

}  // namespace

TEST_SUITE_BEGIN("artifacts");

TEST_CASE("format_double is shortest round-trip text") {
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(650.0) == "650");
    CHECK(format_double(-2.5) == "-2.5");
    const double values[] = {1.0 / 3.0,   0.1 + 0.2,        1e-308,       5e-324,
                             -1.23456789, 123456.789101112, 1.7976931348623157e308,
                             0.0,         -0.0};
    for (double v : values) CHECK(reparse(format_double(v)) == v);
}

TEST_CASE("csv_field quotes exactly when needed") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("1.25") == "1.25");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("two\nlines") == "\"two\nlines\"");
    CHECK(csv_field("") == "");
}

TEST_CASE("parse_csv reads what csv_field writes") {
    std::string text = csv_field("a,b") + "," + csv_field("say \"hi\"") + "," +
                       csv_field("two\nlines") + "\nplain,2.5,\n";
    auto rows = parse_csv(text);
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0].size() == 3);
    CHECK(rows[0][0] == "a,b");
    CHECK(rows[0][1] == "say \"hi\"");
    CHECK(rows[0][2] == "two\nlines");
    CHECK(rows[1] == std::vector<std::string>{"plain", "2.5", ""});

    CHECK(parse_csv("a\r\nb\r\n") == std::vector<std::vector<std::string>>{{"a"}, {"b"}});
    CHECK(parse_csv("a,b") == std::vector<std::vector<std::string>>{{"a", "b"}});
    CHECK_THROWS_AS(parse_csv("\"unterminated"), InputError);
}

TEST_CASE("artifact header ties hash and seed") {
    CHECK(artifact_header(0xff, 11) == "# config=00000000000000ff seed=11");
    CHECK(artifact_header(0xdeadbeefcafe1234ull, 0) ==
          "# config=deadbeefcafe1234 seed=0");
}

TEST_CASE("evaluations table round-trips every number") {
    RunState s = bo_state();
    Problem problem = make_problem("bnh");
    std::string text = evaluations_csv(s, problem, 0xabc);
    CHECK(text.rfind(artifact_header(0xabc, 11), 0) == 0);
    auto rows = body_rows(text);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == std::vector<std::string>{"index", "source", "iteration", "u_x", "u_y",
                                              "f1", "f2", "g"});
    for (std::size_t i = 0; i < 5; ++i) {
        const Evaluation& e = s.evaluations[i];
        CHECK(rows[i + 1][0] == std::to_string(i));
        CHECK(rows[i + 1][1] == to_string(e.source));
        CHECK(reparse(rows[i + 1][3]) == e.x[0]);
        CHECK(reparse(rows[i + 1][4]) == e.x[1]);
        CHECK(reparse(rows[i + 1][5]) == e.f1);
        CHECK(reparse(rows[i + 1][6]) == e.f2);
        CHECK(reparse(rows[i + 1][7]) == e.g);
    }
    CHECK(rows[4][1] == "bo");
    CHECK(rows[4][2] == "1");
}

TEST_CASE("front table lists the feasible archive front with physical units") {
    RunState s = bo_state();
    Problem problem = make_problem("bnh");
    auto rows = body_rows(front_csv(s, problem, 1));
    REQUIRE(rows.size() == 4);  // header and three front points
    CHECK(rows[0] == std::vector<std::string>{"u_x", "u_y", "x", "y", "f1", "f2"});
    CHECK(reparse(rows[1][4]) == 3.0);
    CHECK(reparse(rows[2][4]) == 5.0);
    CHECK(reparse(rows[3][4]) == 10.0);
    // unit 0.9 on x scales to 4.5, unit 1.0 on y to 3.0
    CHECK(reparse(rows[1][0]) == 0.9);
    CHECK(reparse(rows[1][2]) == 4.5);
    CHECK(reparse(rows[1][3]) == 3.0);
}

TEST_CASE("fixed-surrogate front table lists the predicted front") {
    RunState s = optim1_state();
    Problem problem = make_problem("bnh");
    auto rows = body_rows(front_csv(s, problem, 1));
    REQUIRE(rows.size() == 3);
    CHECK(reparse(rows[1][0]) == 0.25);
    CHECK(reparse(rows[1][2]) == 1.25);  // 0.25 of the 0..5 box
    CHECK(reparse(rows[1][4]) == 18.0);
    CHECK(reparse(rows[2][5]) == 22.0);
}

TEST_CASE("trajectory table mirrors the iteration log") {
    auto rows = body_rows(trajectory_csv(bo_state(), 2));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] ==
          std::vector<std::string>{"iteration", "evaluations", "feasible", "hypervolume"});
    CHECK(rows[1] == std::vector<std::string>{"0", "3", "3", "1000"});
    CHECK(rows[2] == std::vector<std::string>{"1", "5", "4", "1200"});
}

TEST_CASE("verification table pairs records with their re-simulations") {
    RunState s = optim1_state();
    Problem problem = make_problem("bnh");
    auto rows = body_rows(verification_csv(s, problem, 9));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0][0] == "index");
    CHECK(reparse(rows[1][3]) == 18.0);   // predicted f1
    CHECK(reparse(rows[1][5]) == 18.5);   // simulated f1
    CHECK(reparse(rows[1][7]) == -0.4);   // g from the verification evaluation
    CHECK(reparse(rows[2][7]) == -0.3);
    CHECK(reparse(rows[2][8]) == 1.0);    // discrepancy

    s.verification.pop_back();
    CHECK_THROWS_AS(verification_csv(s, problem, 9), InputError);
}

TEST_CASE("run summary is deterministic and complete") {
    RunState s = bo_state();
    Problem problem = make_problem("bnh");
    std::string text = summary_text(s, problem, 0xabc);
    CHECK(text.find("problem = bnh\n") != std::string::npos);
    CHECK(text.find("workflow = optim3\n") != std::string::npos);
    CHECK(text.find("seed = 11\n") != std::string::npos);
    CHECK(text.find("evaluations = 5\n") != std::string::npos);
    CHECK(text.find("feasible = 4\n") != std::string::npos);
    CHECK(text.find("front_size = 3\n") != std::string::npos);
    CHECK(text.find("iterations_completed = 1\n") != std::string::npos);
    std::vector<Vector2> front = {{3.0, 45.0}, {5.0, 40.0}, {10.0, 30.0}};
    double hv = hypervolume_2d(front, s.reference);
    CHECK(text.find("final_hypervolume = " + format_double(hv) + "\n") != std::string::npos);
    CHECK(summary_text(s, problem, 0xabc) == text);

    std::string fixed = summary_text(optim1_state(), problem, 0xabc);
    CHECK(fixed.find("predicted_front_size = 2\n") != std::string::npos);
    CHECK(fixed.find("mean_verification_discrepancy = 1\n") != std::string::npos);
    CHECK(fixed.find("verification_evaluations = 2\n") != std::string::npos);
    // scored on the re-simulated front, not the design evaluations
    std::vector<Vector2> resim = {{18.5, 33.0}, {27.0, 22.25}};
    double fixed_hv = hypervolume_2d(resim, Vector2(100.0, 60.0));
    CHECK(fixed.find("final_hypervolume = " + format_double(fixed_hv) + "\n") !=
          std::string::npos);
}

TEST_CASE("comparison tables") {
    ComparisonReport report = tiny_report();
    auto summary = body_rows(comparison_summary_csv(report, 7));
    REQUIRE(summary.size() == 3);
    CHECK(summary[1] == std::vector<std::string>{"optim1", "2", "0.6", "1"});
    CHECK(summary[2] == std::vector<std::string>{"optim3", "2", "0.625", "1"});

    auto runs = body_rows(comparison_runs_csv(report, 7));
    REQUIRE(runs.size() == 5);
    CHECK(runs[1] == std::vector<std::string>{"optim1", "0", "5", "0.5", "1", "1", "1"});
    CHECK(runs[4] == std::vector<std::string>{"optim3", "1", "6", "0.65", "2", "2", "2"});

    auto front = body_rows(comparison_front_csv(report, 0, 7));
    REQUIRE(front.size() == 4);
    CHECK(front[1] == std::vector<std::string>{"0", "5", "0.25", "0.5"});
    CHECK(front[2] == std::vector<std::string>{"1", "6", "-0.125", "-0.75"});

    auto traj = body_rows(comparison_trajectory_csv(report, 1, 7));
    REQUIRE(traj.size() == 4);
    CHECK(traj[1] == std::vector<std::string>{"0", "5", "0", "10", "5", "0.4"});
    CHECK(traj[3] == std::vector<std::string>{"1", "6", "1", "12", "8", "0.7"});

    // every artifact opens with the same identity line
    std::string head = artifact_header(7, 5);
    for (const std::string& text :
         {comparison_summary_csv(report, 7), comparison_runs_csv(report, 7),
          comparison_front_csv(report, 1, 7), comparison_trajectory_csv(report, 0, 7)})
        CHECK(text.rfind(head, 0) == 0);
}

TEST_CASE("text files write and read back") {
    std::string dir = "/tmp/mobo-test-artifacts";
    std::string path = dir + "/nested/out.txt";
    write_text_file(path, "line\n");
    CHECK(read_text_file(path) == "line\n");
    CHECK_THROWS_AS(read_text_file(dir + "/missing.txt"), ConfigError);
}

TEST_SUITE_END();
