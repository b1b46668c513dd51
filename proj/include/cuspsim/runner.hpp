#pragma once
#include "cuspsim/csv.hpp"
#include "cuspsim/lattice.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cuspsim {

enum class Method { Exact, Truncated, Ideal };

std::string method_name(Method m);
Method parse_method(const std::string& name);
/// Comma-separated list, e.g. "exact,ideal".
std::vector<Method> parse_methods(const std::string& list);

enum class TimeUnit { Periods, Absolute };

/**
 Resolved configuration of one run. Either a lattice scenario (n_sites,
 k_init, defect_strength, defect_site) or, for the truncated and ideal
 models only, a bare coupling ratio g/Delta in reduced units (Delta = 1).
 */
struct RunConfig {
    int n_sites = 301;
    long long k_init = 75;
    double defect_strength = 2.0;
    int defect_site = 0;
    std::optional<double> ratio;

    double t_max = 5.0;
    TimeUnit time_unit = TimeUnit::Periods;
    int samples_per_period = 200;
    std::vector<Method> methods = {Method::Exact, Method::Ideal};
    std::optional<int> m_levels;
    int n_offsets = 3;
    std::string output = "quench.csv";
    bool detect_cusps = false;
    bool serial = false;
    std::string command = "quench";

    /// Throws ConfigError on any invariant violation.
    void validate() const;
    /// Lattice scenario; throws ConfigError when running in ratio mode.
    LatticeConfig lattice() const;
    IdealModelParams params() const;
    /// Truncation used by the truncated method: m_levels, else min(40, window limit).
    int resolved_m_levels() const;
    std::vector<double> time_grid() const;
    /// One-line JSON echo of every field.
    std::string to_json() const;
};

/// Parse a JSON config object; unknown keys are rejected with ConfigError.
RunConfig run_config_from_json(const std::string& text, RunConfig base = {});
RunConfig load_run_config(const std::string& path, RunConfig base = {});

/// Observable table for one method on the configured grid.
CsvTable compute_method(const RunConfig& cfg, Method method);

struct RunResult {
    std::vector<std::pair<Method, std::string>> files;
    std::vector<std::pair<Method, CsvTable>> tables;
};

/// Output path for `method`: the configured path when only one method runs,
/// otherwise "<stem>_<method><ext>".
std::string output_path(const RunConfig& cfg, Method method);

/// Compute all requested methods (concurrently unless cfg.serial) and write one CSV per method.
RunResult run(const RunConfig& cfg, bool write_files = true);

} // namespace cuspsim
