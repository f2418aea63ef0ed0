#include "sleepscan/detectors.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>

#include "sleepscan/error.hpp"

namespace sleepscan {

std::string_view to_string(DefectType t) {
    switch (t) {
        case DefectType::PrivilegedAddress: return "PrivilegedAddress";
        case DefectType::UnrestrictedFrom: return "UnrestrictedFrom";
        case DefectType::OwnerInconsistency: return "OwnerInconsistency";
        case DefectType::EmptyTransferEvent: return "EmptyTransferEvent";
    }
    return "?";
}

std::string_view short_code(DefectType t) {
    switch (t) {
        case DefectType::PrivilegedAddress: return "PA";
        case DefectType::UnrestrictedFrom: return "UF";
        case DefectType::OwnerInconsistency: return "OI";
        case DefectType::EmptyTransferEvent: return "ETE";
    }
    return "?";
}

DefectType parse_defect_type(std::string_view text) {
    for (DefectType t : kAllDefects) {
        if (text == to_string(t) || text == short_code(t)) return t;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown defect type '" + std::string(text) + "'");
}

std::string_view to_string(Confidence c) { return c == Confidence::High ? "high" : "low"; }

namespace {

bool is_caller(const Expr& e) { return e->op == Op::Var && e->var->kind == VarKind::Environment && e->var->index == 0x33; }

bool is_storage_direct(const Expr& e) { return e->op == Op::Var && e->var->kind == VarKind::StorageDirect; }

std::string leading_identifier(std::string_view name) {
    std::string out;
    for (char ch : name) {
        if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '$') out += ch;
        else break;
    }
    return out;
}

bool declared_address(const Expr& var, const DetectorOptions& opts) {
    const auto it = opts.state_types.find(leading_identifier(var->var->name));
    return it != opts.state_types.end() && (it->second == "address" || it->second == "address payable");
}

bool address_mask(const Expr& e) {
    return e->op == Op::And && expr::is_const(e->args[1]) && e->args[1]->value == U256::low_mask(160) && is_storage_direct(e->args[0]);
}

bool eligible(const PathRecord& rec) { return rec.end_kind == EndKind::TransferEmission && !rec.diagnostic; }

Finding make_finding(DefectType type, const PathRecord& rec) {
    Finding f;
    f.type = type;
    f.contract = rec.function.contract;
    f.function = rec.function.name;
    f.span = rec.function.src_span;
    f.path_id = rec.path_id;
    f.confidence = rec.tainted ? Confidence::Low : Confidence::High;
    return f;
}

// owner != from against the path constraints.
bool owner_may_differ(const PathRecord& rec, const DetectorOptions& opts) {
    const auto c = make_constraint(Relation::Neq, rec.owner_trace.back(), rec.from_param, rec.pc);
    return solve(rec.constraints.push(c), opts.solver) == SolveResult::Sat;
}

bool single_owner(const PathRecord& rec) {
    return std::all_of(rec.owner_trace.begin(), rec.owner_trace.end(), [&](const Expr& e) { return expr::equal(e, rec.owner_trace.front()); });
}

}  // namespace

std::optional<Finding> detect_privileged_address(const PathRecord& rec, const DetectorOptions& opts) {
    if (!eligible(rec)) return std::nullopt;
    const ConstraintPattern pattern{Relation::Eq, is_caller, is_storage_direct};
    for (const auto& c : find_matches(rec.constraints, pattern)) {
        const Expr& other = is_caller(expr::strip_address_mask(c.lhs)) ? c.rhs : c.lhs;
        const Expr bare = expr::strip_address_mask(other);
        if (!declared_address(bare, opts) && !address_mask(other)) continue;
        Finding f = make_finding(DefectType::PrivilegedAddress, rec);
        f.witness.push_back(c.str());
        return f;
    }
    return std::nullopt;
}

std::optional<Finding> detect_unrestricted_from(const PathRecord& rec, const DetectorOptions& opts) {
    if (!eligible(rec) || rec.owner_trace.empty() || !rec.from_param || !single_owner(rec)) return std::nullopt;
    if (!owner_may_differ(rec, opts)) return std::nullopt;
    Finding f = make_finding(DefectType::UnrestrictedFrom, rec);
    f.witness.push_back("owner = " + expr::to_string(rec.owner_trace.back()));
    f.witness.push_back("from = " + expr::to_string(rec.from_param));
    return f;
}

std::optional<Finding> detect_owner_inconsistency(const PathRecord& rec, const DetectorOptions& opts) {
    if (!eligible(rec) || rec.owner_trace.size() < 2 || !rec.from_param || single_owner(rec)) return std::nullopt;
    if (!owner_may_differ(rec, opts)) return std::nullopt;
    Finding f = make_finding(DefectType::OwnerInconsistency, rec);
    for (const auto& o : rec.owner_trace) f.witness.push_back("owner = " + expr::to_string(o));
    f.witness.push_back("from = " + expr::to_string(rec.from_param));
    return f;
}

std::optional<Finding> detect_empty_transfer_event(const std::vector<PathRecord>& recs, const DetectorOptions&) {
    for (const auto& rec : recs) {
        if (!eligible(rec) || rec.sstore_mark_at_emission || rec.sstore_mark_at_exit) continue;
        Finding f = make_finding(DefectType::EmptyTransferEvent, rec);
        f.witness.push_back("no SSTORE before the Transfer emission at pc " + std::to_string(rec.pc) + " or before function exit");
        return f;
    }
    return std::nullopt;
}

std::vector<Finding> analyze_contract(const CompilationUnit& unit, const std::vector<PathRecord>& records, const DetectorOptions& opts) {
    std::vector<Finding> all;
    auto on = [&](DefectType t) { return opts.enabled.count(t) > 0; };
    for (const auto& rec : records) {
        if (!eligible(rec)) continue;
        if (on(DefectType::PrivilegedAddress)) {
            if (auto f = detect_privileged_address(rec, opts)) all.push_back(std::move(*f));
        }
        if (on(DefectType::UnrestrictedFrom)) {
            if (auto f = detect_unrestricted_from(rec, opts)) all.push_back(std::move(*f));
        }
        if (on(DefectType::OwnerInconsistency)) {
            if (auto f = detect_owner_inconsistency(rec, opts)) all.push_back(std::move(*f));
        }
    }
    if (on(DefectType::EmptyTransferEvent)) {
        std::map<std::string, std::vector<PathRecord>> by_function;
        for (const auto& rec : records) by_function[rec.function.signature()].push_back(rec);
        for (const auto& [sig, recs] : by_function) {
            if (auto f = detect_empty_transfer_event(recs, opts)) all.push_back(std::move(*f));
        }
    }
    // One per (type, function), preferring high confidence then the earliest path.
    std::map<std::pair<DefectType, std::string>, Finding> best;
    for (auto& f : all) {
        f.contract = unit.contract_name;
        const auto key = std::make_pair(f.type, f.function);
        const auto it = best.find(key);
        if (it == best.end()) {
            best.emplace(key, std::move(f));
        } else if (std::tie(f.confidence, f.path_id) < std::tie(it->second.confidence, it->second.path_id)) {
            it->second = std::move(f);
        }
    }
    std::vector<Finding> out;
    for (auto& [key, f] : best) out.push_back(std::move(f));
    std::sort(out.begin(), out.end(), [](const Finding& a, const Finding& b) {
        return std::tie(a.span.file, a.span.start, a.type, a.function) < std::tie(b.span.file, b.span.start, b.type, b.function);
    });
    return out;
}

}  // namespace sleepscan
