#include "sleepscan/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "sleepscan/error.hpp"

namespace sleepscan {

using nlohmann::json;

ReportFinding to_report_finding(const Finding& f, const CompilationUnit& unit) {
    ReportFinding r;
    r.type = f.type;
    r.function = f.function;
    if (const auto* src = unit.source(f.span.file)) r.file = src->path;
    r.start = f.span.start;
    r.length = f.span.length;
    r.confidence = f.confidence;
    r.witness = f.witness;
    return r;
}

json to_json(const ContractReport& r) {
    json findings = json::array();
    for (const auto& f : r.findings) {
        findings.push_back({{"type", to_string(f.type)},
                            {"function", f.function},
                            {"file", f.file},
                            {"start", f.start},
                            {"length", f.length},
                            {"confidence", to_string(f.confidence)},
                            {"witness", f.witness}});
    }
    json j = {{"schema_version", r.schema_version},
              {"input", r.input},
              {"contract", r.contract},
              {"compiler_version", r.compiler_version},
              {"functions_total", r.functions_total},
              {"functions_analyzed", r.functions_analyzed},
              {"analyzed_functions", r.analyzed_functions},
              {"findings", findings},
              {"timings",
               {{"load_ms", r.timings.load_ms},
                {"explore_ms", r.timings.explore_ms},
                {"detect_ms", r.timings.detect_ms},
                {"total_ms", r.timings.total_ms}}},
              {"timed_out", r.timed_out},
              {"paths", r.paths},
              {"dispatch_misses", r.dispatch_misses},
              {"steps", r.steps},
              {"diagnostics", r.diagnostics}};
    j["error"] = r.error ? json(*r.error) : json(nullptr);
    return j;
}

ContractReport report_from_json(const json& j) {
    try {
        ContractReport r;
        r.schema_version = j.at("schema_version").get<int>();
        if (r.schema_version != kSchemaVersion) {
            throw Error(ErrorCode::InvalidConfig, "unsupported report schema_version " + std::to_string(r.schema_version));
        }
        r.input = j.value("input", "");
        r.contract = j.at("contract").get<std::string>();
        r.compiler_version = j.value("compiler_version", "");
        r.functions_total = j.value("functions_total", std::size_t{0});
        r.functions_analyzed = j.value("functions_analyzed", std::size_t{0});
        r.analyzed_functions = j.value("analyzed_functions", std::vector<std::string>{});
        for (const auto& f : j.at("findings")) {
            ReportFinding x;
            x.type = parse_defect_type(f.at("type").get<std::string>());
            x.function = f.at("function").get<std::string>();
            x.file = f.value("file", "");
            x.start = f.value("start", std::int64_t{0});
            x.length = f.value("length", std::int64_t{0});
            x.confidence = f.value("confidence", "high") == "low" ? Confidence::Low : Confidence::High;
            x.witness = f.value("witness", std::vector<std::string>{});
            r.findings.push_back(std::move(x));
        }
        if (j.contains("timings")) {
            const auto& t = j["timings"];
            r.timings.load_ms = t.value("load_ms", 0.0);
            r.timings.explore_ms = t.value("explore_ms", 0.0);
            r.timings.detect_ms = t.value("detect_ms", 0.0);
            r.timings.total_ms = t.value("total_ms", 0.0);
        }
        r.timed_out = j.value("timed_out", false);
        r.paths = j.value("paths", std::size_t{0});
        r.dispatch_misses = j.value("dispatch_misses", std::size_t{0});
        r.steps = j.value("steps", std::uint64_t{0});
        r.diagnostics = j.value("diagnostics", std::map<std::string, std::size_t>{});
        if (j.contains("error") && !j["error"].is_null()) r.error = j["error"].get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("malformed report: ") + e.what());
    }
}

std::string render_text(const ContractReport& r) {
    std::ostringstream out;
    out << r.contract << " (" << r.input << ")";
    if (!r.compiler_version.empty()) out << " solc " << r.compiler_version;
    out << "\n";
    if (r.error) {
        out << "  error: " << *r.error << "\n";
        return out.str();
    }
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.1f", r.timings.total_ms);
    out << "  functions analyzed " << r.functions_analyzed << "/" << r.functions_total << ", paths " << r.paths << ", " << ms << " ms";
    if (r.timed_out) out << ", TIMED OUT";
    out << "\n";
    if (r.findings.empty()) out << "  no findings\n";
    for (const auto& f : r.findings) {
        out << "  [" << short_code(f.type) << "] " << to_string(f.type) << " in " << f.function << " at " << f.file << ":" << f.start << ":"
            << f.length;
        if (f.confidence == Confidence::Low) out << " (low confidence)";
        out << "\n";
        for (const auto& w : f.witness) out << "      " << w << "\n";
    }
    return out.str();
}

std::vector<ContractReport> load_reports(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<ContractReport> out;
    for (const auto& f : files) {
        std::ifstream in(f);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::Io, f.string() + ": " + e.what());
        }
        if (j.is_array()) {
            for (const auto& x : j) out.push_back(report_from_json(x));
        } else {
            out.push_back(report_from_json(j));
        }
    }
    return out;
}

std::vector<CorpusLabel> labels_from_json(const json& j) {
    std::vector<CorpusLabel> out;
    try {
        for (const auto& x : j) {
            CorpusLabel l;
            l.contract = x.at("contract").get<std::string>();
            l.notes = x.value("notes", "");
            for (const auto& e : x.value("expected", json::array())) {
                l.expected.push_back(ExpectedFinding{parse_defect_type(e.at("type").get<std::string>()), e.at("function").get<std::string>()});
            }
            out.push_back(std::move(l));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("malformed labels: ") + e.what());
    }
    return out;
}

std::vector<CorpusLabel> load_labels(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorCode::Io, "cannot read labels " + file.string());
    try {
        return labels_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, file.string() + ": " + e.what());
    }
}

std::optional<double> TypeScore::precision() const {
    if (tp + fp == 0) return std::nullopt;
    return 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp);
}

Evaluation evaluate_corpus(const std::vector<CorpusLabel>& labels, const std::vector<ContractReport>& reports) {
    Evaluation ev;
    for (DefectType t : kAllDefects) ev.per_type[t];
    for (const auto& r : reports) {
        const std::string stem = std::filesystem::path(r.input).stem().string();
        const auto it = std::find_if(labels.begin(), labels.end(), [&](const CorpusLabel& l) { return l.contract == r.contract || l.contract == stem; });
        if (it == labels.end()) throw Error(ErrorCode::UnlabeledContract, "no label for " + r.contract + " (" + r.input + ")");
        std::set<std::pair<DefectType, std::string>> expected;
        for (const auto& e : it->expected) expected.emplace(e.type, e.function);
        std::set<std::pair<DefectType, std::string>> reported;
        for (const auto& f : r.findings) reported.emplace(f.type, f.function);
        for (const auto& key : reported) {
            auto& s = ev.per_type[key.first];
            if (expected.count(key)) ++s.tp;
            else ++s.fp;
        }
        for (const auto& key : expected) {
            if (!reported.count(key)) ++ev.per_type[key.first].fn;
        }
    }
    for (const auto& [t, s] : ev.per_type) {
        ev.overall.tp += s.tp;
        ev.overall.fp += s.fp;
        ev.overall.fn += s.fn;
    }
    return ev;
}

std::string format_precision(const std::optional<double>& p) {
    if (!p) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", *p);
    return buf;
}

std::string render_evaluation(const Evaluation& e) {
    std::ostringstream out;
    char line[128];
    std::snprintf(line, sizeof line, "%-20s %5s %5s %5s %9s\n", "type", "TP", "FP", "FN", "precision");
    out << line;
    auto row = [&](std::string_view name, const TypeScore& s) {
        std::snprintf(line, sizeof line, "%-20.*s %5zu %5zu %5zu %9s\n", static_cast<int>(name.size()), name.data(), s.tp, s.fp, s.fn,
                      format_precision(s.precision()).c_str());
        out << line;
    };
    for (const auto& [t, s] : e.per_type) row(to_string(t), s);
    row("overall", e.overall);
    return out.str();
}

}  // namespace sleepscan
