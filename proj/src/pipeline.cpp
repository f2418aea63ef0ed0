#include "sleepscan/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <exception>
#include <filesystem>

#include "sleepscan/ast_analysis.hpp"
#include "sleepscan/disasm.hpp"
#include "sleepscan/error.hpp"
#include "sleepscan/symexec.hpp"

namespace sleepscan {

namespace fs = std::filesystem;

void RunConfig::validate() const {
    if (inputs.empty()) throw Error(ErrorCode::InvalidConfig, "no input paths given");
    if (timeout_seconds <= 0 || loop_bound <= 0 || max_steps == 0 || max_paths == 0 || solver_query_seconds <= 0 || jobs < 0) {
        throw Error(ErrorCode::InvalidConfig, "numeric limits must be positive");
    }
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t) { return std::chrono::duration<double, std::milli>(Clock::now() - t).count(); }

}  // namespace

ContractReport analyze_unit(const CompilationUnit& unit, const RunConfig& config) {
    const auto start = Clock::now();
    ContractReport report;
    report.contract = unit.contract_name;
    report.compiler_version = unit.compiler_version.str();

    const Cfg cfg = build_cfg(unit.instructions);
    const auto callable = callable_functions(unit);
    std::vector<FunctionInfo> chosen;
    if (config.prune) {
        chosen = select_target_functions(unit);
    } else {
        chosen = callable;
    }
    report.functions_total = callable.size();
    report.functions_analyzed = chosen.size();
    for (const auto& fn : chosen) report.analyzed_functions.push_back(fn.name);
    const auto binding = find_owner_return_binding(unit);

    ExplorationBudget budget;
    budget.loop_bound = config.loop_bound;
    budget.max_steps = config.max_steps;
    budget.max_paths = config.max_paths;
    budget.deadline = start + std::chrono::seconds(config.timeout_seconds);

    const auto explore_start = Clock::now();
    const int n = static_cast<int>(chosen.size());
    std::vector<ExplorationResult> results(chosen.size());
    std::vector<std::exception_ptr> errors(chosen.size());
    std::vector<char> missing(chosen.size(), 0);
    // Explorations share nothing mutable; each writes its own slot.
#pragma omp parallel for schedule(dynamic) if (config.parallel_functions && n > 1)
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            results[k] = explore_function(unit, cfg, chosen[k], binding, budget);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::EntryNotFound) missing[k] = 1;
            else errors[k] = std::current_exception();
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    report.timings.explore_ms = ms_since(explore_start);

    std::vector<PathRecord> records;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (missing[i]) {
            ++report.diagnostics["entry-not-found"];
            continue;
        }
        auto& r = results[i];
        report.paths += r.paths;
        report.dispatch_misses += r.dispatch_misses;
        report.steps += r.steps;
        report.timed_out = report.timed_out || r.timed_out;
        for (const auto& [d, count] : r.diagnostics) report.diagnostics[std::string(to_string(d))] += count;
        std::move(r.records.begin(), r.records.end(), std::back_inserter(records));
    }

    const auto detect_start = Clock::now();
    DetectorOptions opts;
    opts.state_types = state_variable_types(unit);
    opts.solver.time_limit = std::chrono::seconds(config.solver_query_seconds);
    opts.enabled = config.enabled;
    for (const auto& f : analyze_contract(unit, records, opts)) report.findings.push_back(to_report_finding(f, unit));
    report.timings.detect_ms = ms_since(detect_start);
    report.timings.total_ms = ms_since(start);
    return report;
}

ContractReport analyze_input(const std::string& input, const RunConfig& config) {
    const auto start = Clock::now();
    ContractReport report;
    report.input = input;
    try {
        const auto unit = load_compilation(input, config.contract);
        const double load_ms = ms_since(start);
        report = analyze_unit(unit, config);
        report.input = input;
        report.timings.load_ms = load_ms;
        report.timings.total_ms = ms_since(start);
    } catch (const std::exception& e) {
        report.contract = fs::path(input).stem().string();
        report.error = e.what();
        report.timings.total_ms = ms_since(start);
    }
    return report;
}

std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
    std::vector<std::string> out;
    for (const auto& in : inputs) {
        const fs::path p(in);
        if (!fs::is_directory(p)) {
            out.push_back(in);
            continue;
        }
        std::vector<std::string> json_files;
        bool artifact_dir = false;
        for (const auto& e : fs::directory_iterator(p)) {
            if (!e.is_regular_file()) continue;
            const auto name = e.path().filename().string();
            if (name.ends_with(".bin-runtime") || name.ends_with(".srcmap-runtime")) artifact_dir = true;
            if (e.path().extension() == ".json" && !name.ends_with(".ast.json")) json_files.push_back(e.path().string());
        }
        if (artifact_dir || json_files.empty()) {
            out.push_back(in);
        } else {
            std::sort(json_files.begin(), json_files.end());
            out.insert(out.end(), json_files.begin(), json_files.end());
        }
    }
    return out;
}

namespace {

RunResult run_impl(const RunConfig& config, bool parallel) {
    config.validate();
    RunConfig cfg = config;
    cfg.parallel_functions = parallel && config.parallel_functions;
    const auto inputs = expand_inputs(config.inputs);
    RunResult result;
    result.reports.resize(inputs.size());
    const int n = static_cast<int>(inputs.size());
    const int threads = config.jobs > 0 ? config.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (parallel && n > 1)
    for (int i = 0; i < n; ++i) {
        result.reports[static_cast<std::size_t>(i)] = analyze_input(inputs[static_cast<std::size_t>(i)], cfg);
    }
    for (const auto& r : result.reports) {
        if (r.error) result.exit_status = 1;
    }
    return result;
}

}  // namespace

RunResult run(const RunConfig& config) { return run_impl(config, true); }

RunResult run_serial(const RunConfig& config) { return run_impl(config, false); }

}  // namespace sleepscan
