#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sleepscan/constraints.hpp"
#include "sleepscan/ingest.hpp"
#include "sleepscan/symexec.hpp"

namespace sleepscan {

enum class DefectType { PrivilegedAddress, UnrestrictedFrom, OwnerInconsistency, EmptyTransferEvent };

inline constexpr DefectType kAllDefects[] = {DefectType::PrivilegedAddress, DefectType::UnrestrictedFrom,
                                             DefectType::OwnerInconsistency, DefectType::EmptyTransferEvent};

std::string_view to_string(DefectType t);
/// PA, UF, OI, ETE.
std::string_view short_code(DefectType t);
/// Accepts the full name or the short code. Throws Error(InvalidConfig).
DefectType parse_defect_type(std::string_view text);

enum class Confidence { High, Low };

std::string_view to_string(Confidence c);

struct Finding {
    DefectType type = DefectType::PrivilegedAddress;
    std::string contract;
    std::string function;
    SrcSpan span;
    std::vector<std::string> witness;
    std::size_t path_id = 0;
    Confidence confidence = Confidence::High;

    friend bool operator==(const Finding&, const Finding&) = default;
};

struct DetectorOptions {
    /// Declared types of state variables by name, for address typing.
    std::map<std::string, std::string> state_types;
    SolverOptions solver;
    std::set<DefectType> enabled{std::begin(kAllDefects), std::end(kAllDefects)};
};

std::optional<Finding> detect_privileged_address(const PathRecord& rec, const DetectorOptions& opts);
std::optional<Finding> detect_unrestricted_from(const PathRecord& rec, const DetectorOptions& opts);
std::optional<Finding> detect_owner_inconsistency(const PathRecord& rec, const DetectorOptions& opts);
/// `recs` are the records of one function.
std::optional<Finding> detect_empty_transfer_event(const std::vector<PathRecord>& recs, const DetectorOptions& opts);

/// All enabled detectors over every eligible record; one finding per
/// (type, function), ordered by source position.
std::vector<Finding> analyze_contract(const CompilationUnit& unit, const std::vector<PathRecord>& records, const DetectorOptions& opts);

}  // namespace sleepscan
