#pragma once

#include "weylscope/error.hpp"
#include "weylscope/geometry.hpp"
#include "weylscope/spectra.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace weylscope::cli {

enum class Task { spectrum, orbits, weyl, trace, rellich, report };

std::string to_string(Task task);
std::optional<Task> parse_task(std::string_view name);

struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    double step = 0.0;
};

/// Closed interval; either side may be open-ended.
struct Range {
    std::optional<double> lo;
    std::optional<double> hi;
    bool contains(double x) const { return (!lo || x >= *lo) && (!hi || x <= *hi); }
};

struct SpectrumParams {
    std::optional<double> lambda_max;   // derived from the task when absent
    double lambda_min = 0.0;
    int resolution = 0;                 // boundary nodes; 0 picks from λ_max
};

struct WeylParams {
    std::vector<double> points;
    std::vector<double> windows;        // dyadic window starts
    double predicted_exponent = 0.5;
    std::optional<GridSpec> grid;
};

struct PeakScan {
    double t_lo = 0.0;
    double t_hi = 0.0;
    double smoothing = 0.01;
};

struct TraceParams {
    double period = 0.0;
    double epsilon = 0.0;
    double tail_tol = 1e-10;
    GridSpec grid;
    int dimension = 1;
    std::optional<PeakScan> peaks;
    std::optional<std::pair<int, int>> amplitude;   // (bounces, winding) of the family
};

struct OrbitParams {
    int max_bounces = 5;
    std::optional<int> max_winding;
    std::optional<double> max_length;
    std::optional<double> admissibility_epsilon;
};

struct RellichParams {
    int modes = 20;
};

struct ExperimentConfig {
    Task task = Task::spectrum;
    bool planar = true;
    geometry::DomainSpec domain;
    geometry::HigherDomainSpec higher;
    std::string domain_key;             // canonical serialization used for cache keys and reports
    spectra::BoundaryCondition bc = spectra::BoundaryCondition::dirichlet;
    SpectrumParams spectrum;
    WeylParams weyl;
    TraceParams trace;
    OrbitParams orbits;
    RellichParams rellich;
    std::vector<std::pair<std::string, Range>> expect;
    std::optional<std::filesystem::path> output;
    std::vector<std::filesystem::path> inputs;   // report task
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

/// Throws ConfigError with source:line and the offending field. A given `task` must agree with
/// the config's own "task" entry and is used when the config has none.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "config",
                              std::optional<Task> task = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Task> task = std::nullopt);

struct RunOutcome {
    std::filesystem::path directory;
    std::vector<std::string> failed_checks;
};

/// Executes one task and writes its artifacts plus manifest.json into `directory`.
RunOutcome run(const ExperimentConfig& config, const std::filesystem::path& directory);

/// Aggregates every manifest.json below `inputs` into report.md and CSV tables in `directory`.
/// Throws MissingArtifact when none is found.
RunOutcome report(const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& directory);

/// Spectrum for the configured domain, through the cache in $WEYLSCOPE_CACHE when set.
spectra::Spectrum obtain_spectrum(const ExperimentConfig& config, double lambda_max);

/// 2 for configuration problems, 3 for numerical failures.
int exit_code(const Error& error);

} // namespace weylscope::cli
