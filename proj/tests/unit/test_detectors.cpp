#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "sleepscan/ast_analysis.hpp"
#include "sleepscan/detectors.hpp"
#include "sleepscan/disasm.hpp"
#include "sleepscan/error.hpp"

using namespace sleepscan;

namespace {

const U256 kAddrMask = U256::low_mask(160);

Expr caller() { return expr::var(VarKind::Environment, 0x33, nullptr, "env", "msg.sender", 160); }
Expr param(int i, const char* name) { return expr::var(VarKind::Parameter, i, nullptr, "calldata", name, 160); }
Expr direct(const char* name, std::uint64_t slot) {
    return expr::var(VarKind::StorageDirect, 0, expr::constant(U256(slot)), "storage", name, 256);
}
Expr mapped(const char* name, const Expr& key) {
    const Expr slot = expr::make(Op::Sha3, {key, expr::constant(U256(2))});
    return expr::var(VarKind::StorageMapping, 0, slot, "storage", name, 256);
}
Expr masked(const Expr& e) { return expr::band(e, expr::constant(kAddrMask)); }

PathRecord emission(const std::string& fn = "transferFrom") {
    PathRecord r;
    r.function.name = fn;
    r.function.selector = 0x23b872dd;
    r.function.params = {{"from", "address"}, {"to", "address"}, {"tokenId", "uint256"}};
    r.function.src_span = SrcSpan{100, 50, 0};
    r.end_kind = EndKind::TransferEmission;
    r.from_param = param(0, "from");
    r.to_param = param(1, "to");
    r.token_param = expr::var(VarKind::Parameter, 2, nullptr, "calldata", "tokenId", 256);
    r.sstore_mark_at_emission = true;
    r.sstore_mark_at_exit = true;
    return r;
}

Expr owner() { return masked(mapped("_owners[...]", expr::var(VarKind::Parameter, 2, nullptr, "calldata", "tokenId", 256))); }

DetectorOptions options() {
    DetectorOptions o;
    o.state_types = {{"_secretOwner", "address"}, {"_paused", "bool"}, {"_admin", "address payable"}};
    return o;
}

CompilationUnit empty_unit() {
    CompilationUnit u;
    u.contract_name = "Synthetic";
    return u;
}

}  // namespace

TEST_CASE("defect type names") {
    for (DefectType t : kAllDefects) {
        CHECK(parse_defect_type(to_string(t)) == t);
        CHECK(parse_defect_type(short_code(t)) == t);
    }
    CHECK_THROWS_AS(parse_defect_type("XX"), Error);
}

TEST_CASE("privileged address needs an address-typed direct slot") {
    const auto opts = options();
    auto r = emission();
    r.constraints = r.constraints.push(make_constraint(Relation::Eq, caller(), direct("_secretOwner", 9)));
    const auto f = detect_privileged_address(r, opts);
    REQUIRE(f);
    CHECK(f->type == DefectType::PrivilegedAddress);
    CHECK(f->function == "transferFrom");
    CHECK(f->span == r.function.src_span);
    CHECK(!f->witness.empty());

    SUBCASE("mask alone also types the slot") {
        auto m = emission();
        m.constraints = m.constraints.push(make_constraint(Relation::Eq, masked(direct("slot_0x7", 7)), caller()));
        CHECK(detect_privileged_address(m, opts));
    }
    SUBCASE("mapping lookups are not privileged") {
        auto m = emission();
        m.constraints = m.constraints.push(make_constraint(Relation::Eq, caller(), masked(mapped("_operators[...]", caller()))));
        CHECK_FALSE(detect_privileged_address(m, opts));
    }
    SUBCASE("non address state is not privileged") {
        auto m = emission();
        m.constraints = m.constraints.push(make_constraint(Relation::Eq, caller(), direct("_paused", 3)));
        CHECK_FALSE(detect_privileged_address(m, opts));
    }
    SUBCASE("inequality is not privileged") {
        auto m = emission();
        m.constraints = m.constraints.push(make_constraint(Relation::Neq, caller(), direct("_secretOwner", 9)));
        CHECK_FALSE(detect_privileged_address(m, opts));
    }
    SUBCASE("disjunct of an or guard counts") {
        auto m = emission();
        const Expr guard = expr::make(Op::Or, {expr::eq(caller(), owner()), expr::eq(caller(), masked(direct("_admin", 4)))});
        m.constraints = m.constraints.push(make_constraint(Relation::Nonzero, guard));
        CHECK(detect_privileged_address(m, opts));
    }
    SUBCASE("only emission records qualify") {
        auto m = r;
        m.end_kind = EndKind::NormalExit;
        CHECK_FALSE(detect_privileged_address(m, opts));
        m = r;
        m.diagnostic = Diagnostic::LoopBound;
        CHECK_FALSE(detect_privileged_address(m, opts));
    }
}

TEST_CASE("unrestricted from") {
    const auto opts = options();
    auto r = emission();
    r.owner_trace = {owner()};
    const auto f = detect_unrestricted_from(r, opts);
    REQUIRE(f);
    CHECK(f->type == DefectType::UnrestrictedFrom);

    SUBCASE("owner checked against from") {
        auto m = r;
        m.constraints = m.constraints.push(make_constraint(Relation::Eq, owner(), m.from_param));
        CHECK_FALSE(detect_unrestricted_from(m, opts));
    }
    SUBCASE("no owner lookup") {
        auto m = r;
        m.owner_trace.clear();
        CHECK_FALSE(detect_unrestricted_from(m, opts));
    }
    SUBCASE("tainted path is low confidence") {
        auto m = r;
        m.tainted = true;
        const auto g = detect_unrestricted_from(m, opts);
        REQUIRE(g);
        CHECK(g->confidence == Confidence::Low);
    }
}

TEST_CASE("owner inconsistency") {
    const auto opts = options();
    const Expr other = masked(direct("punks.owner", 11));
    auto r = emission();
    r.owner_trace = {owner(), other, owner()};
    // the check used the overriding lookup only
    r.constraints = r.constraints.push(make_constraint(Relation::Eq, other, r.from_param));
    const auto f = detect_owner_inconsistency(r, opts);
    REQUIRE(f);
    CHECK(f->type == DefectType::OwnerInconsistency);
    CHECK(f->witness.size() == 4);

    SUBCASE("repeated identical owner is not inconsistent") {
        auto m = emission();
        m.owner_trace = {owner(), owner()};
        CHECK_FALSE(detect_owner_inconsistency(m, opts));
        CHECK(detect_unrestricted_from(m, opts));
    }
    SUBCASE("latest owner equals from") {
        auto m = emission();
        m.owner_trace = {other, owner()};
        m.constraints = m.constraints.push(make_constraint(Relation::Eq, m.from_param, owner()));
        CHECK_FALSE(detect_owner_inconsistency(m, opts));
    }
}

TEST_CASE("empty transfer event") {
    const auto opts = options();
    auto r = emission("emitTransfers");
    r.sstore_mark_at_emission = false;
    r.sstore_mark_at_exit = false;
    const auto f = detect_empty_transfer_event({r}, opts);
    REQUIRE(f);
    CHECK(f->type == DefectType::EmptyTransferEvent);

    auto later = r;
    later.sstore_mark_at_exit = true;
    CHECK_FALSE(detect_empty_transfer_event({later}, opts));

    auto before = r;
    before.sstore_mark_at_emission = true;
    CHECK_FALSE(detect_empty_transfer_event({before}, opts));

    auto revert = r;
    revert.end_kind = EndKind::Revert;
    CHECK_FALSE(detect_empty_transfer_event({revert}, opts));

    // one clean emission among stores is enough
    CHECK(detect_empty_transfer_event({before, later, r}, opts));
}

TEST_CASE("analyze_contract keeps one finding per type and function") {
    const auto opts = options();
    std::vector<PathRecord> recs;
    for (std::size_t i = 0; i < 3; ++i) {
        auto r = emission();
        r.id = i;
        r.path_id = 10 - i;
        r.tainted = i == 0;
        r.owner_trace = {owner()};
        recs.push_back(r);
    }
    auto other = emission("safeTransferFrom");
    other.function.src_span = SrcSpan{10, 5, 0};
    other.owner_trace = {owner()};
    other.path_id = 40;
    recs.push_back(other);

    const auto findings = analyze_contract(empty_unit(), recs, opts);
    REQUIRE(findings.size() == 2);
    // source order
    CHECK(findings[0].function == "safeTransferFrom");
    CHECK(findings[1].function == "transferFrom");
    CHECK(findings[1].confidence == Confidence::High);
    CHECK(findings[1].path_id == 8);
    for (const auto& f : findings) CHECK(f.contract == "Synthetic");

    auto only = opts;
    only.enabled = {DefectType::PrivilegedAddress};
    CHECK(analyze_contract(empty_unit(), recs, only).empty());
}

TEST_CASE("unrestricted from and owner inconsistency never share a record") {
    const auto opts = options();
    std::mt19937_64 rng(3);
    const std::vector<Expr> owners = {owner(), masked(direct("punks.owner", 11)), masked(direct("_alt", 12)), param(0, "from")};
    int uf = 0;
    int oi = 0;
    for (int i = 0; i < 300; ++i) {
        auto r = emission();
        const auto n = rng() % 4;
        for (std::size_t k = 0; k < n; ++k) r.owner_trace.push_back(owners[rng() % owners.size()]);
        if (rng() % 3 == 0 && !r.owner_trace.empty()) {
            r.constraints = r.constraints.push(make_constraint(Relation::Eq, r.owner_trace[rng() % r.owner_trace.size()], r.from_param));
        }
        const bool a = detect_unrestricted_from(r, opts).has_value();
        const bool b = detect_owner_inconsistency(r, opts).has_value();
        CHECK_FALSE((a && b));
        uf += a;
        oi += b;
    }
    CHECK(uf > 0);
    CHECK(oi > 0);
}

TEST_CASE("combined fixture gives exactly its two defects") {
    const auto unit = load_compilation(test::artifact("fig2_fig4_combined"));
    const auto cfg = build_cfg(unit.instructions);
    const auto binding = find_owner_return_binding(unit);
    std::vector<PathRecord> recs;
    for (const auto& fn : select_target_functions(unit)) {
        auto r = explore_function(unit, cfg, fn, binding, {});
        recs.insert(recs.end(), r.records.begin(), r.records.end());
    }
    DetectorOptions opts;
    opts.state_types = state_variable_types(unit);
    const auto findings = analyze_contract(unit, recs, opts);
    REQUIRE(findings.size() == 2);
    std::set<DefectType> types;
    for (const auto& f : findings) types.insert(f.type);
    CHECK(types == std::set<DefectType>{DefectType::UnrestrictedFrom, DefectType::EmptyTransferEvent});
}
