#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "sleepscan/ast_analysis.hpp"
#include "sleepscan/disasm.hpp"
#include "sleepscan/error.hpp"

using namespace sleepscan;

namespace {

std::set<std::string> target_names(const char* artifact) {
    std::set<std::string> out;
    for (const auto& f : select_target_functions(load_compilation(test::artifact(artifact)))) out.insert(f.name);
    return out;
}

}  // namespace

TEST_CASE("compute_selector examples") {
    CHECK(compute_selector("transferFrom(address,address,uint256)") == 0x23b872ddU);
    CHECK(compute_selector("ownerOf(uint256)") == 0x6352211eU);
    CHECK(compute_selector("") == 0xc5d24601U);
    // Any oracle is honoured.
    CHECK(compute_selector("x", [](std::string_view) { return Hash256{0xde, 0xad, 0xbe, 0xef}; }) == 0xdeadbeefU);
}

TEST_CASE("canonical abi types") {
    CHECK(canonical_abi_type("address payable") == "address");
    CHECK(canonical_abi_type("uint256[] calldata") == "uint256[]");
    CHECK(canonical_abi_type("contract IVault") == "address");
    CHECK(canonical_abi_type("string memory") == "string");
    CHECK(canonical_abi_type("enum Foo.Bar") == "uint8");
    CHECK_FALSE(canonical_abi_type("struct Foo.Bar memory"));
}

TEST_CASE("select_target_functions on the figure fixtures") {
    CHECK(target_names("fig1_privileged_address") == std::set<std::string>{"transferFrom", "mint"});
    CHECK(target_names("fig4_empty_transfer_event").count("emitTransfers") == 1);
    CHECK(target_names("approval_only").empty());
    CHECK(target_names("pruning_20") == std::set<std::string>{"transferFrom", "mint"});
}

TEST_CASE("select_target_functions legacy syntax") {
    // 0.4 old-style event invocation without `emit`.
    CHECK(target_names("fn_log1_transfer").count("transferFrom") == 1);
    CHECK(target_names("fig2_unrestricted_from_v0426").count("transferFrom") == 1);
}

TEST_CASE("target functions have dispatcher entries") {
    for (const char* name : {"fig1_privileged_address", "fig3_owner_inconsistency", "clean_collection", "fig2_unrestricted_from_v0426",
                             "fig2_unrestricted_from_v0821"}) {
        const auto unit = load_compilation(test::artifact(name));
        const auto cfg = build_cfg(unit.instructions);
        for (const auto& f : select_target_functions(unit)) {
            REQUIRE(f.selector);
            CHECK(find_function_entry(cfg, *f.selector));
            CHECK((f.visibility == Visibility::External || f.visibility == Visibility::Public));
        }
        for (const auto& f : callable_functions(unit)) CHECK(find_function_entry(cfg, *f.selector));
    }
}

TEST_CASE("selectors agree with compiler annotations") {
    const auto unit = load_compilation(test::artifact("fig2_unrestricted_from_v0426"));
    for (const auto& f : callable_functions(unit)) CHECK(compute_selector(f.signature()) == *f.selector);
}

TEST_CASE("no ast raises NoAst") {
    auto unit = load_compilation(test::artifact("fig1_privileged_address"));
    unit.ast.children.clear();
    try {
        select_target_functions(unit);
        FAIL("expected NoAst");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoAst);
    }
}

TEST_CASE("find_owner_return_binding") {
    const auto std_unit = load_compilation(test::artifact("fig2_unrestricted_from"));
    const auto b = find_owner_return_binding(std_unit);
    REQUIRE(b);
    CHECK(b->returned_identifier == "owner");
    CHECK(std_unit.snippet(b->return_src_span) == "return owner");

    const auto renamed = find_owner_return_binding(load_compilation(test::artifact("renamed_owner_of")));
    REQUIRE(renamed);
    CHECK(renamed->returned_identifier == "holder");

    const auto fig3 = find_owner_return_binding(load_compilation(test::artifact("fig3_owner_inconsistency")));
    REQUIRE(fig3);
    CHECK(fig3->returned_identifier == "punks[tokenId].owner");
    CHECK(fig3->sites.size() == 2);

    CHECK_FALSE(find_owner_return_binding(load_compilation(test::artifact("approval_only"))));
}

TEST_CASE("pruning is monotone under emit removal") {
    auto unit = load_compilation(test::artifact("fig4_empty_transfer_event"));
    const auto before = select_target_functions(unit).size();
    // Rename every Transfer event definition: no emission remains.
    std::function<void(AstNode&)> rec = [&](AstNode& n) {
        if (n.kind == "EventDefinition" && n.str("name") && *n.str("name") == "Transfer") n.attributes["name"] = std::string("Moved");
        for (auto& c : n.children) rec(c);
    };
    rec(unit.ast);
    CHECK(select_target_functions(unit).size() <= before);
    CHECK(select_target_functions(unit).empty());
}

TEST_CASE("state variable types") {
    const auto types = state_variable_types(load_compilation(test::artifact("fig1_privileged_address")));
    CHECK(types.at("_secretOwner") == "address");
    CHECK(types.at("_owners").starts_with("mapping"));
}
