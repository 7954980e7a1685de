#include "mobo/config_io.hpp"

#include <charconv>
#include <set>
#include <sstream>
#include <string_view>

#include "mobo/artifacts.hpp"

namespace mobo {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

ConfigError bad_line(int line, const std::string& what) {
    return ConfigError("config line " + std::to_string(line) + ": " + what);
}

int parse_int(std::string_view text, int line) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw bad_line(line, "expected an integer, got \"" + std::string(text) + "\"");
    return value;
}

std::uint64_t parse_seed(std::string_view text, int line) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw bad_line(line, "expected an unsigned integer, got \"" + std::string(text) + "\"");
    return value;
}

double parse_real(std::string_view text, int line) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw bad_line(line, "expected a number, got \"" + std::string(text) + "\"");
    return value;
}

}  // namespace

void ExperimentFile::validate() const {
    config.validate();
    if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
    if (!external.command.empty()) {
        if (external.dimension < 1)
            throw ConfigError("an external command needs a positive dimension");
        if (external.timeout_seconds <= 0.0)
            throw ConfigError("external timeout_seconds must be positive");
        if (external.max_concurrency < 1)
            throw ConfigError("external max_concurrency must be at least 1");
    }
}

Problem ExperimentFile::bind_problem() const {
    if (external.command.empty()) return make_problem(config.problem);
    ExternalOptions options;
    options.timeout_seconds = external.timeout_seconds;
    options.max_concurrency = external.max_concurrency;
    return external_adapter(external.command, external.dimension, options);
}

ExperimentFile parse_config(const std::string& text) {
    ExperimentFile file;
    ExperimentConfig& c = file.config;
    std::string section;
    std::set<std::string> seen;
    std::istringstream lines(text);
    std::string raw;
    int line = 0;
    while (std::getline(lines, raw)) {
        ++line;
        std::string_view body = trim(raw);
        if (body.empty() || body.front() == '#') continue;
        if (body.front() == '[') {
            if (body.back() != ']') throw bad_line(line, "unterminated section header");
            section = std::string(trim(body.substr(1, body.size() - 2)));
            if (section != "acquisition" && section != "gp" && section != "kernels" &&
                section != "moea" && section != "external")
                throw bad_line(line, "unknown section [" + section + "]");
            continue;
        }
        std::size_t eq = body.find('=');
        if (eq == std::string_view::npos)
            throw bad_line(line, "expected key = value");
        std::string key(trim(body.substr(0, eq)));
        std::string_view value = trim(body.substr(eq + 1));
        if (key.empty()) throw bad_line(line, "missing key before =");
        std::string qualified = section.empty() ? key : section + "." + key;
        if (!seen.insert(qualified).second)
            throw bad_line(line, "duplicate key " + qualified);

        if (section.empty()) {
            if (key == "problem") c.problem = std::string(value);
            else if (key == "workflow") {
                try {
                    c.workflow = workflow_from_string(std::string(value));
                } catch (const std::exception& e) {
                    throw bad_line(line, e.what());
                }
            } else if (key == "seed") c.seed = parse_seed(value, line);
            else if (key == "initial_doe_size") c.initial_doe_size = parse_int(value, line);
            else if (key == "iterations") c.iterations = parse_int(value, line);
            else if (key == "batch_size") c.batch_size = parse_int(value, line);
            else if (key == "total_budget") c.total_budget = parse_int(value, line);
            else if (key == "refit_every") c.refit_every = parse_int(value, line);
            else if (key == "refit_evals") c.refit_evals = parse_int(value, line);
            else if (key == "reference_margin") c.reference_margin = parse_real(value, line);
            else if (key == "repetitions") file.repetitions = parse_int(value, line);
            else throw bad_line(line, "unknown key " + key);
        } else if (section == "acquisition") {
            AcquisitionSettings& a = c.acquisition;
            if (key == "mc_samples") a.mc_samples = parse_int(value, line);
            else if (key == "mc_samples_final") a.mc_samples_final = parse_int(value, line);
            else if (key == "screen") a.screen = parse_int(value, line);
            else if (key == "restarts") a.restarts = parse_int(value, line);
            else if (key == "step_init") a.step_init = parse_real(value, line);
            else if (key == "step_min") a.step_min = parse_real(value, line);
            else if (key == "temperature_scale") a.temperature_scale = parse_real(value, line);
            else if (key == "parego_alpha") a.parego_alpha = parse_real(value, line);
            else throw bad_line(line, "unknown key " + qualified);
        } else if (section == "gp") {
            if (key == "nugget") c.gp.nugget = parse_real(value, line);
            else throw bad_line(line, "unknown key " + qualified);
        } else if (section == "kernels") {
            KernelFamily family = KernelFamily::Matern52;
            try {
                family = kernel_family_from_string(std::string(value));
            } catch (const std::exception& e) {
                throw bad_line(line, e.what());
            }
            if (key == "f1") c.kernels.f1 = family;
            else if (key == "f2") c.kernels.f2 = family;
            else if (key == "g") c.kernels.g = family;
            else throw bad_line(line, "unknown key " + qualified);
        } else if (section == "moea") {
            MoeaSettings& m = c.moea;
            if (key == "population") m.population = parse_int(value, line);
            else if (key == "generations") m.generations = parse_int(value, line);
            else if (key == "verify_points") m.verify_points = parse_int(value, line);
            else if (key == "crossover_prob") m.crossover_prob = parse_real(value, line);
            else if (key == "crossover_eta") m.crossover_eta = parse_real(value, line);
            else if (key == "mutation_prob") m.mutation_prob = parse_real(value, line);
            else if (key == "mutation_eta") m.mutation_eta = parse_real(value, line);
            else throw bad_line(line, "unknown key " + qualified);
        } else {  // external
            ExternalBinding& x = file.external;
            if (key == "command") x.command = std::string(value);
            else if (key == "dimension") x.dimension = parse_int(value, line);
            else if (key == "timeout_seconds") x.timeout_seconds = parse_real(value, line);
            else if (key == "max_concurrency") x.max_concurrency = parse_int(value, line);
            else throw bad_line(line, "unknown key " + qualified);
        }
    }
    return file;
}

ExperimentFile load_config(const std::string& path) {
    return parse_config(read_text_file(path));
}

std::string canonical_config(const ExperimentFile& file) {
    const ExperimentConfig& c = file.config;
    std::ostringstream out;
    out << "problem = " << c.problem << "\n";
    out << "workflow = " << workflow_name(c.workflow) << "\n";
    out << "seed = " << c.seed << "\n";
    out << "initial_doe_size = " << c.initial_doe_size << "\n";
    out << "iterations = " << c.iterations << "\n";
    out << "batch_size = " << c.batch_size << "\n";
    out << "total_budget = " << c.total_budget << "\n";
    out << "refit_every = " << c.refit_every << "\n";
    out << "refit_evals = " << c.refit_evals << "\n";
    out << "reference_margin = " << format_double(c.reference_margin) << "\n";
    out << "repetitions = " << file.repetitions << "\n";
    out << "\n[acquisition]\n";
    out << "mc_samples = " << c.acquisition.mc_samples << "\n";
    out << "mc_samples_final = " << c.acquisition.mc_samples_final << "\n";
    out << "screen = " << c.acquisition.screen << "\n";
    out << "restarts = " << c.acquisition.restarts << "\n";
    out << "step_init = " << format_double(c.acquisition.step_init) << "\n";
    out << "step_min = " << format_double(c.acquisition.step_min) << "\n";
    out << "temperature_scale = " << format_double(c.acquisition.temperature_scale) << "\n";
    out << "parego_alpha = " << format_double(c.acquisition.parego_alpha) << "\n";
    out << "\n[gp]\n";
    out << "nugget = " << format_double(c.gp.nugget) << "\n";
    out << "\n[kernels]\n";
    out << "f1 = " << to_string(c.kernels.f1) << "\n";
    out << "f2 = " << to_string(c.kernels.f2) << "\n";
    out << "g = " << to_string(c.kernels.g) << "\n";
    out << "\n[moea]\n";
    out << "population = " << c.moea.population << "\n";
    out << "generations = " << c.moea.generations << "\n";
    out << "verify_points = " << c.moea.verify_points << "\n";
    out << "crossover_prob = " << format_double(c.moea.crossover_prob) << "\n";
    out << "crossover_eta = " << format_double(c.moea.crossover_eta) << "\n";
    out << "mutation_prob = " << format_double(c.moea.mutation_prob) << "\n";
    out << "mutation_eta = " << format_double(c.moea.mutation_eta) << "\n";
    out << "\n[external]\n";
    out << "command =" << (file.external.command.empty() ? "" : " " + file.external.command)
        << "\n";
    out << "dimension = " << file.external.dimension << "\n";
    out << "timeout_seconds = " << format_double(file.external.timeout_seconds) << "\n";
    out << "max_concurrency = " << file.external.max_concurrency << "\n";
    return out.str();
}

std::uint64_t config_hash(const ExperimentFile& file) {
    std::string text = canonical_config(file);
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char byte : std::string_view(text)) {
        hash ^= byte;
        hash *= 1099511628211ull;
    }
    return hash;
}

}  // namespace mobo
