#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sleepscan/detectors.hpp"

namespace sleepscan {

inline constexpr int kSchemaVersion = 1;

struct ReportFinding {
    DefectType type = DefectType::PrivilegedAddress;
    std::string function;
    std::string file;
    std::int64_t start = 0;
    std::int64_t length = 0;
    Confidence confidence = Confidence::High;
    std::vector<std::string> witness;

    friend bool operator==(const ReportFinding&, const ReportFinding&) = default;
};

struct Timings {
    double load_ms = 0;
    double explore_ms = 0;
    double detect_ms = 0;
    double total_ms = 0;

    friend bool operator==(const Timings&, const Timings&) = default;
};

struct ContractReport {
    int schema_version = kSchemaVersion;
    std::string input;
    std::string contract;
    std::string compiler_version;
    std::size_t functions_total = 0;
    std::size_t functions_analyzed = 0;
    std::vector<std::string> analyzed_functions;
    std::vector<ReportFinding> findings;
    Timings timings;
    bool timed_out = false;
    std::size_t paths = 0;
    std::size_t dispatch_misses = 0;
    std::uint64_t steps = 0;
    std::map<std::string, std::size_t> diagnostics;
    std::optional<std::string> error;

    friend bool operator==(const ContractReport&, const ContractReport&) = default;
};

ReportFinding to_report_finding(const Finding& f, const CompilationUnit& unit);

nlohmann::json to_json(const ContractReport& r);
/// Throws Error(InvalidConfig) on schema mismatch or missing fields.
ContractReport report_from_json(const nlohmann::json& j);
std::string render_text(const ContractReport& r);

/// Reads every *.json under a directory; each file holds one report or an array.
std::vector<ContractReport> load_reports(const std::filesystem::path& dir);

struct ExpectedFinding {
    DefectType type = DefectType::PrivilegedAddress;
    std::string function;
};

struct CorpusLabel {
    std::string contract;
    std::vector<ExpectedFinding> expected;
    std::string notes;
};

std::vector<CorpusLabel> load_labels(const std::filesystem::path& file);
std::vector<CorpusLabel> labels_from_json(const nlohmann::json& j);

struct TypeScore {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    /// TP/(TP+FP) in percent; absent when nothing was reported.
    std::optional<double> precision() const;
};

struct Evaluation {
    std::map<DefectType, TypeScore> per_type;
    TypeScore overall;
};

/// Reports are matched to labels by contract name or input file stem.
/// Throws Error(UnlabeledContract).
Evaluation evaluate_corpus(const std::vector<CorpusLabel>& labels, const std::vector<ContractReport>& reports);

/// "78.1", or "n/a" when undefined.
std::string format_precision(const std::optional<double>& p);
std::string render_evaluation(const Evaluation& e);

}  // namespace sleepscan
