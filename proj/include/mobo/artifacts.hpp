#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mobo/engine.hpp"
#include "mobo/problems.hpp"

namespace mobo {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

/// RFC-4180 field encoding: values containing commas, quotes, or line
/// breaks are wrapped in double quotes with embedded quotes doubled.
std::string csv_field(const std::string& value);

/// Minimal RFC-4180 reader for the files written here: quoted fields,
/// doubled quotes, LF or CRLF records. Raises InputError on a stray quote.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// First line of every artifact, tying it to its run:
/// "# config=<16 hex digits> seed=<seed>".
std::string artifact_header(std::uint64_t config_hash, std::uint64_t seed);

/// index,source,iteration,u_<var...>,f1,f2,g per evaluation, in evaluation
/// order. Designs stay in unit-cube coordinates (u_ columns).
std::string evaluations_csv(const RunState& state, const Problem& problem,
                            std::uint64_t config_hash);

/// The run's front, one design per row with unit-cube (u_ prefix) and
/// physical columns plus f1,f2. Bayesian runs report the feasible archive
/// front; the fixed-surrogate run reports its predicted front.
std::string front_csv(const RunState& state, const Problem& problem,
                      std::uint64_t config_hash);

/// iteration,evaluations,feasible,hypervolume per logged iteration.
std::string trajectory_csv(const RunState& state, std::uint64_t config_hash);

/// Predicted versus re-simulated objectives per verified design:
/// index,u_<var...>,predicted_f1,predicted_f2,simulated_f1,simulated_f2,
/// simulated_g,discrepancy. Only the fixed-surrogate workflow produces one.
std::string verification_csv(const RunState& state, const Problem& problem,
                             std::uint64_t config_hash);

/// key = value run summary: budgets, front size, reference point, final
/// hypervolume. Contains nothing time- or host-dependent.
std::string summary_text(const RunState& state, const Problem& problem,
                         std::uint64_t config_hash);

/// workflow,repetitions,median_final_hypervolume,wins per workflow.
std::string comparison_summary_csv(const ComparisonReport& report,
                                   std::uint64_t config_hash);

/// workflow,repetition,seed,final_hypervolume,front_size,reference_f1,
/// reference_f2 for every scored run.
std::string comparison_runs_csv(const ComparisonReport& report,
                                std::uint64_t config_hash);

/// repetition,seed,f1_max,f2_max rows of one workflow's fronts, objectives
/// negated into maximization units for reporting (displayed value is
/// exactly -1 times the internal one).
std::string comparison_front_csv(const ComparisonReport& report, std::size_t workflow_index,
                                 std::uint64_t config_hash);

/// repetition,seed,iteration,evaluations,feasible,hypervolume rows of one
/// workflow's logged trajectories.
std::string comparison_trajectory_csv(const ComparisonReport& report,
                                      std::size_t workflow_index, std::uint64_t config_hash);

/// Write text to path, creating parent directories. Raises ConfigError on
/// any I/O failure.
void write_text_file(const std::string& path, const std::string& text);

/// Whole file as a string; raises ConfigError when unreadable.
std::string read_text_file(const std::string& path);

}  // namespace mobo
