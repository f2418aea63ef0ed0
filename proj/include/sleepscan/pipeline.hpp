#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sleepscan/detectors.hpp"
#include "sleepscan/report.hpp"

namespace sleepscan {

enum class OutputFormat { Text, Json };

struct RunConfig {
    std::vector<std::string> inputs;
    int timeout_seconds = 600;
    int loop_bound = 3;
    std::uint64_t max_steps = 100000;
    std::size_t max_paths = 4096;
    int solver_query_seconds = 10;
    std::set<DefectType> enabled{std::begin(kAllDefects), std::end(kAllDefects)};
    OutputFormat format = OutputFormat::Text;
    std::optional<std::string> contract;
    /// Debug mode: explore every callable function, not only Transfer emitters.
    bool prune = true;
    /// Worker threads; 0 keeps the OpenMP default.
    int jobs = 0;
    /// Explore the functions of one contract concurrently.
    bool parallel_functions = true;

    /// Throws Error(InvalidConfig).
    void validate() const;
};

struct RunResult {
    int exit_status = 0;
    std::vector<ContractReport> reports;
};

/// Analysis of an already loaded unit. Tool errors propagate as exceptions.
ContractReport analyze_unit(const CompilationUnit& unit, const RunConfig& config);

/// Loads and analyses one input; errors end up in the report, never thrown.
ContractReport analyze_input(const std::string& input, const RunConfig& config);

/// Directories that hold standard-JSON files are expanded to those files;
/// anything else is passed through.
std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs);

/// Contracts in parallel (bounded by `jobs`); reports keep input order. Exit
/// status 1 when any contract failed. Throws Error(InvalidConfig).
RunResult run(const RunConfig& config);
/// Serial reference of run(): one thread, functions in order.
RunResult run_serial(const RunConfig& config);

}  // namespace sleepscan
