#include "mobo/artifacts.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mobo/pareto.hpp"

namespace mobo {

namespace {

std::string join_row(const std::vector<std::string>& fields) {
    std::string row;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) row += ',';
        row += csv_field(fields[i]);
    }
    row += '\n';
    return row;
}

std::vector<std::string> design_columns(const Problem& problem, const char* prefix) {
    std::vector<std::string> names;
    for (const VariableSpec& v : problem.variables()) names.push_back(prefix + v.name);
    return names;
}

void append_vector(std::vector<std::string>& fields, const Vector& values) {
    for (int i = 0; i < values.size(); ++i) fields.push_back(format_double(values[i]));
}

/// Hypervolume of the run's scoring front against its frozen reference:
/// the re-simulated front for the fixed-surrogate workflow, the archive
/// front otherwise.
double scored_hypervolume(const RunState& state) {
    const bool optim1 = state.config.workflow == Workflow::Optim1;
    std::vector<Vector2> points;
    for (const Evaluation& e : state.evaluations) {
        if ((e.source == EvalSource::Verification) != optim1 || e.g > 0.0) continue;
        points.emplace_back(e.f1, e.f2);
    }
    if (points.empty()) return 0.0;
    std::vector<Vector2> front;
    for (int i : non_dominated_filter(points)) front.push_back(points[i]);
    return hypervolume_2d(front, state.reference);
}

}  // namespace

std::string format_double(double value) {
    char buffer[64];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc()) throw NumericalError("double formatting failed");
    return std::string(buffer, end);
}

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
    std::string quoted = "\"";
    for (char c : value) {
        quoted += c;
        if (c == '"') quoted += '"';
    }
    quoted += '"';
    return quoted;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            if (field_started && !field.empty())
                throw InputError("csv: quote inside an unquoted field");
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            if (!field.empty() || field_started || !row.empty()) end_row();
        } else if (c == '\r') {
            // consumed; the following \n ends the record
        } else {
            field += c;
            field_started = true;
        }
    }
    if (quoted) throw InputError("csv: unterminated quoted field");
    if (!field.empty() || field_started || !row.empty()) end_row();
    return rows;
}

std::string artifact_header(std::uint64_t config_hash, std::uint64_t seed) {
    char buffer[80];
    std::snprintf(buffer, sizeof(buffer), "# config=%016llx seed=%llu",
                  static_cast<unsigned long long>(config_hash),
                  static_cast<unsigned long long>(seed));
    return buffer;
}

std::string evaluations_csv(const RunState& state, const Problem& problem,
                            std::uint64_t config_hash) {
    std::string out = artifact_header(config_hash, state.config.seed) + "\n";
    std::vector<std::string> header = {"index", "source", "iteration"};
    for (const std::string& name : design_columns(problem, "u_")) header.push_back(name);
    header.insert(header.end(), {"f1", "f2", "g"});
    out += join_row(header);
    for (std::size_t i = 0; i < state.evaluations.size(); ++i) {
        const Evaluation& e = state.evaluations[i];
        std::vector<std::string> fields = {std::to_string(i), to_string(e.source),
                                           std::to_string(e.iteration)};
        append_vector(fields, e.x);
        fields.push_back(format_double(e.f1));
        fields.push_back(format_double(e.f2));
        fields.push_back(format_double(e.g));
        out += join_row(fields);
    }
    return out;
}

std::string front_csv(const RunState& state, const Problem& problem,
                      std::uint64_t config_hash) {
    std::string out = artifact_header(config_hash, state.config.seed) + "\n";
    std::vector<std::string> header = design_columns(problem, "u_");
    for (const std::string& name : design_columns(problem, "")) header.push_back(name);
    header.insert(header.end(), {"f1", "f2"});
    out += join_row(header);
    auto emit = [&](const Vector& u, double f1, double f2) {
        std::vector<std::string> fields;
        append_vector(fields, u);
        append_vector(fields, problem.denormalized(u));
        fields.push_back(format_double(f1));
        fields.push_back(format_double(f2));
        out += join_row(fields);
    };
    if (state.config.workflow == Workflow::Optim1) {
        for (int i = 0; i < state.front_designs.rows(); ++i)
            emit(state.front_designs.row(i), state.front_objectives(i, 0),
                 state.front_objectives(i, 1));
    } else {
        for (const Evaluation& e : state.front_evaluations()) emit(e.x, e.f1, e.f2);
    }
    return out;
}

std::string trajectory_csv(const RunState& state, std::uint64_t config_hash) {
    std::string out = artifact_header(config_hash, state.config.seed) + "\n";
    out += join_row({"iteration", "evaluations", "feasible", "hypervolume"});
    for (const IterationLog& entry : state.hv_log) {
        out += join_row({std::to_string(entry.iteration), std::to_string(entry.evaluations),
                         std::to_string(entry.feasible), format_double(entry.hypervolume)});
    }
    return out;
}

std::string verification_csv(const RunState& state, const Problem& problem,
                             std::uint64_t config_hash) {
    std::string out = artifact_header(config_hash, state.config.seed) + "\n";
    std::vector<std::string> header = {"index"};
    for (const std::string& name : design_columns(problem, "u_")) header.push_back(name);
    header.insert(header.end(), {"predicted_f1", "predicted_f2", "simulated_f1",
                                 "simulated_f2", "simulated_g", "discrepancy"});
    out += join_row(header);
    std::vector<const Evaluation*> checks;
    for (const Evaluation& e : state.evaluations)
        if (e.source == EvalSource::Verification) checks.push_back(&e);
    if (checks.size() != state.verification.size())
        throw InputError("verification records out of step with verification evaluations");
    for (std::size_t i = 0; i < state.verification.size(); ++i) {
        const VerificationRecord& rec = state.verification[i];
        std::vector<std::string> fields = {std::to_string(i)};
        append_vector(fields, rec.x);
        fields.push_back(format_double(rec.predicted[0]));
        fields.push_back(format_double(rec.predicted[1]));
        fields.push_back(format_double(rec.simulated[0]));
        fields.push_back(format_double(rec.simulated[1]));
        fields.push_back(format_double(checks[i]->g));
        fields.push_back(format_double(rec.discrepancy));
        out += join_row(fields);
    }
    return out;
}

std::string summary_text(const RunState& state, const Problem& problem,
                         std::uint64_t config_hash) {
    std::ostringstream out;
    out << artifact_header(config_hash, state.config.seed) << "\n";
    out << "problem = " << problem.name() << "\n";
    out << "workflow = " << workflow_name(state.config.workflow) << "\n";
    out << "seed = " << state.config.seed << "\n";
    out << "evaluations = " << state.budget_spent() << "\n";
    out << "verification_evaluations = " << state.verification.size() << "\n";
    int feasible = 0;
    for (const Evaluation& e : state.evaluations)
        if (e.source != EvalSource::Verification && e.g <= 0.0) ++feasible;
    out << "feasible = " << feasible << "\n";
    if (state.config.workflow == Workflow::Optim1) {
        out << "predicted_front_size = " << state.front_designs.rows() << "\n";
        double total = 0.0;
        for (const VerificationRecord& rec : state.verification) total += rec.discrepancy;
        double mean = state.verification.empty()
                          ? 0.0
                          : total / static_cast<double>(state.verification.size());
        out << "mean_verification_discrepancy = " << format_double(mean) << "\n";
    } else {
        out << "front_size = " << state.front_evaluations().size() << "\n";
        out << "iterations_completed = " << state.iteration << "\n";
    }
    out << "reference_f1 = " << format_double(state.reference[0]) << "\n";
    out << "reference_f2 = " << format_double(state.reference[1]) << "\n";
    out << "final_hypervolume = " << format_double(scored_hypervolume(state)) << "\n";
    return out.str();
}

std::string comparison_summary_csv(const ComparisonReport& report,
                                   std::uint64_t config_hash) {
    std::string out = artifact_header(config_hash, report.seeds.front()) + "\n";
    out += join_row({"workflow", "repetitions", "median_final_hypervolume", "wins"});
    for (const WorkflowSummary& w : report.workflows) {
        out += join_row({workflow_name(w.workflow), std::to_string(w.final_hv.size()),
                         format_double(w.median_hv), std::to_string(w.wins)});
    }
    return out;
}

std::string comparison_runs_csv(const ComparisonReport& report, std::uint64_t config_hash) {
    std::string out = artifact_header(config_hash, report.seeds.front()) + "\n";
    out += join_row({"workflow", "repetition", "seed", "final_hypervolume", "front_size",
                     "reference_f1", "reference_f2"});
    for (const WorkflowSummary& w : report.workflows) {
        for (std::size_t r = 0; r < w.final_hv.size(); ++r) {
            out += join_row({workflow_name(w.workflow), std::to_string(r),
                             std::to_string(report.seeds[r]), format_double(w.final_hv[r]),
                             std::to_string(w.fronts[r].rows()),
                             format_double(report.references[r][0]),
                             format_double(report.references[r][1])});
        }
    }
    return out;
}

std::string comparison_front_csv(const ComparisonReport& report, std::size_t workflow_index,
                                 std::uint64_t config_hash) {
    const WorkflowSummary& w = report.workflows.at(workflow_index);
    std::string out = artifact_header(config_hash, report.seeds.front()) + "\n";
    out += join_row({"repetition", "seed", "f1_max", "f2_max"});
    for (std::size_t r = 0; r < w.fronts.size(); ++r) {
        const Matrix& front = w.fronts[r];
        for (int i = 0; i < front.rows(); ++i) {
            out += join_row({std::to_string(r), std::to_string(report.seeds[r]),
                             format_double(-front(i, 0)), format_double(-front(i, 1))});
        }
    }
    return out;
}

std::string comparison_trajectory_csv(const ComparisonReport& report,
                                      std::size_t workflow_index, std::uint64_t config_hash) {
    const WorkflowSummary& w = report.workflows.at(workflow_index);
    std::string out = artifact_header(config_hash, report.seeds.front()) + "\n";
    out += join_row({"repetition", "seed", "iteration", "evaluations", "feasible",
                     "hypervolume"});
    for (std::size_t r = 0; r < w.trajectories.size(); ++r) {
        for (const IterationLog& entry : w.trajectories[r]) {
            out += join_row({std::to_string(r), std::to_string(report.seeds[r]),
                             std::to_string(entry.iteration), std::to_string(entry.evaluations),
                             std::to_string(entry.feasible),
                             format_double(entry.hypervolume)});
        }
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::filesystem::path target(path);
    std::error_code ec;
    if (target.has_parent_path()) {
        std::filesystem::create_directories(target.parent_path(), ec);
        if (ec) throw ConfigError("cannot create directory " + target.parent_path().string());
    }
    std::ofstream out(target, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw ConfigError("write failed for " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw ConfigError("read failed for " + path);
    return buffer.str();
}

}  // namespace mobo
