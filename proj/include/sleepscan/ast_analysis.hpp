#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sleepscan/ingest.hpp"
#include "sleepscan/keccak.hpp"

namespace sleepscan {

enum class Visibility { External, Public, Internal, Private };

std::string_view to_string(Visibility v);

struct FunctionInfo {
    std::string name;
    std::optional<std::uint32_t> selector;
    std::vector<std::pair<std::string, std::string>> params;  // (name, canonical abi type)
    SrcSpan src_span;
    Visibility visibility = Visibility::Internal;
    bool emits_transfer = false;
    std::string contract;  // defining contract
    std::int64_t ast_id = -1;

    std::string signature() const;
};

/// One `return` inside an `ownerOf` definition.
struct ReturnSite {
    SrcSpan statement;
    SrcSpan expression;
    std::string identifier;
    std::string contract;
};

struct ReturnBinding {
    std::string function_name = "ownerOf";
    SrcSpan return_src_span;
    std::string returned_identifier;
    /// Every return of every `ownerOf` in the unit, most derived contract first.
    std::vector<ReturnSite> sites;
};

using HashOracle = std::function<Hash256(std::string_view)>;

std::uint32_t compute_selector(std::string_view signature, const HashOracle& oracle);
std::uint32_t compute_selector(std::string_view signature);

/// Canonical ABI type for an AST typeString ("address payable" -> "address",
/// "uint256[] calldata" -> "uint256[]", "contract IVault" -> "address").
/// nullopt for types without a simple canonical form (structs, mappings).
std::optional<std::string> canonical_abi_type(std::string_view type_string);

/// Externally callable functions of the analyzed contract, one per selector,
/// resolved to the most derived implementation.
std::vector<FunctionInfo> callable_functions(const CompilationUnit& unit);

/// The subset of callable_functions whose body transitively emits Transfer.
/// Throws Error(NoAst).
std::vector<FunctionInfo> select_target_functions(const CompilationUnit& unit);

std::optional<ReturnBinding> find_owner_return_binding(const CompilationUnit& unit);

/// Declared type strings of state variables visible in the analyzed contract.
std::map<std::string, std::string> state_variable_types(const CompilationUnit& unit);

}  // namespace sleepscan
