#pragma once

#include <cstdint>
#include <string>

#include "mobo/engine.hpp"
#include "mobo/problems.hpp"

namespace mobo {

/// Binding to an external simulator command. An empty command means the
/// built-in problem named by the run configuration.
struct ExternalBinding {
    std::string command;
    int dimension = 0;
    double timeout_seconds = 60.0;
    int max_concurrency = 4;
};

/// Everything an experiment file describes: the run configuration plus the
/// problem binding and comparison repetition count.
struct ExperimentFile {
    ExperimentConfig config;
    ExternalBinding external;
    int repetitions = 5;

    /// config.validate() plus the file-level fields; ConfigError on failure.
    void validate() const;
    /// The bound problem: the external adapter when a command is set, the
    /// named built-in otherwise.
    Problem bind_problem() const;
};

/// Parse the sectioned key = value format. Blank lines and lines starting
/// with # are skipped. Unknown keys or sections, duplicate keys, and
/// malformed values raise ConfigError naming the offending line.
ExperimentFile parse_config(const std::string& text);

/// parse_config over the file's contents; unreadable paths raise ConfigError.
ExperimentFile load_config(const std::string& path);

/// Canonical snapshot: every setting in a fixed order with shortest
/// round-trip number formatting, so equivalent files serialize to identical
/// text. parse_config(canonical_config(f)) reproduces f exactly.
std::string canonical_config(const ExperimentFile& file);

/// FNV-1a (64-bit) over the canonical snapshot. Stamped into every artifact
/// so outputs can be traced back to the exact configuration.
std::uint64_t config_hash(const ExperimentFile& file);

}  // namespace mobo
