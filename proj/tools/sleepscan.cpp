#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "sleepscan/error.hpp"
#include "sleepscan/ingest.hpp"
#include "sleepscan/pipeline.hpp"
#include "sleepscan/report.hpp"

using namespace sleepscan;

namespace {

std::set<DefectType> parse_only(const std::string& list) {
    std::set<DefectType> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.insert(parse_defect_type(item));
    }
    if (out.empty()) throw Error(ErrorCode::InvalidConfig, "--only needs at least one defect type");
    return out;
}

void emit(const std::string& text, const std::string& out_file) {
    if (out_file.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_file);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + out_file);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Detects sleepminting defects in ERC-721 contracts from compiled EVM bytecode"};
    app.require_subcommand(1);

    RunConfig config;
    std::string format = "text";
    std::string only;
    std::string out_file;
    std::string contract;
    bool no_prune = false;
    bool dump_disasm = false;

    auto* analyze = app.add_subcommand("analyze", "Analyse compiled contracts (standard JSON files or artifact directories)");
    analyze->add_option("paths", config.inputs, "Inputs")->required();
    analyze->add_option("--timeout", config.timeout_seconds, "Wall-clock seconds per contract")->capture_default_str();
    analyze->add_option("--loop-bound", config.loop_bound, "Visits per loop head")->capture_default_str();
    analyze->add_option("--max-steps", config.max_steps, "Steps per function")->capture_default_str();
    analyze->add_option("--max-paths", config.max_paths, "Paths per function")->capture_default_str();
    analyze->add_option("--solver-timeout", config.solver_query_seconds, "Seconds per solver query")->capture_default_str();
    analyze->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
    analyze->add_option("--only", only, "Comma separated subset of PA,UF,OI,ETE");
    analyze->add_option("--out", out_file, "Write the report here instead of stdout");
    analyze->add_option("--contract", contract, "Contract to analyse when a unit holds several");
    analyze->add_option("--jobs", config.jobs, "Worker threads (0 = OpenMP default)")->capture_default_str();
    analyze->add_flag("--no-prune", no_prune, "Explore every callable function, not only Transfer emitters");
    analyze->add_flag("--dump-disasm", dump_disasm, "Print the annotated disassembly and exit");

    std::string labels_file;
    std::string reports_dir;
    auto* evaluate = app.add_subcommand("evaluate", "Precision per defect type against labelled reports");
    evaluate->add_option("--labels", labels_file, "Labels JSON file")->required();
    evaluate->add_option("--reports", reports_dir, "Directory of JSON reports")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) {
            if (!contract.empty()) config.contract = contract;
            if (!only.empty()) config.enabled = parse_only(only);
            config.format = format == "json" ? OutputFormat::Json : OutputFormat::Text;
            config.prune = !no_prune;
            if (dump_disasm) {
                std::string text;
                for (const auto& in : expand_inputs(config.inputs)) {
                    const auto unit = load_compilation(in, config.contract);
                    text += "# " + unit.contract_name + " (" + in + ")\n" + disassembly_listing(unit);
                }
                emit(text, out_file);
                return 0;
            }
            const auto result = run(config);
            std::string text;
            if (config.format == OutputFormat::Json) {
                nlohmann::json j;
                if (result.reports.size() == 1) {
                    j = to_json(result.reports.front());
                } else {
                    j = nlohmann::json::array();
                    for (const auto& r : result.reports) j.push_back(to_json(r));
                }
                text = j.dump(2) + "\n";
            } else {
                for (const auto& r : result.reports) text += render_text(r);
            }
            emit(text, out_file);
            for (const auto& r : result.reports) {
                if (r.error) std::cerr << "error: " << r.input << ": " << *r.error << "\n";
            }
            return result.exit_status;
        }
        if (*evaluate) {
            const auto labels = load_labels(labels_file);
            const auto reports = load_reports(reports_dir);
            std::cout << render_evaluation(evaluate_corpus(labels, reports));
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::InvalidConfig ? 2 : 1;
    }
    return 0;
}
