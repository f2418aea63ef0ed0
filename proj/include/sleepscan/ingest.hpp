#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sleepscan/disasm.hpp"
#include "sleepscan/version.hpp"

namespace sleepscan {

enum class JumpKind { Regular, IntoFunction, ReturnFromFunction };

struct SourceMapEntry {
    std::int64_t start = 0;
    std::int64_t length = 0;
    int file = -1;
    JumpKind jump = JumpKind::Regular;

    friend bool operator==(const SourceMapEntry&, const SourceMapEntry&) = default;
};

struct SrcSpan {
    std::int64_t start = 0;
    std::int64_t length = 0;
    int file = -1;

    std::int64_t end() const { return start + length; }
    bool contains(const SrcSpan& other) const {
        return file == other.file && other.start >= start && other.end() <= end();
    }
    static SrcSpan of(const SourceMapEntry& e) { return {e.start, e.length, e.file}; }
    /// Parses the AST "start:length:file" form; nullopt when malformed.
    static std::optional<SrcSpan> parse(std::string_view text);

    friend bool operator==(const SrcSpan&, const SrcSpan&) = default;
    friend auto operator<=>(const SrcSpan&, const SrcSpan&) = default;
};

using AstAttr = std::variant<std::string, std::int64_t, bool, std::vector<std::int64_t>>;

/// Compact solc AST node. Nested nodes become children tagged with the field
/// they came from (`role`), e.g. "body", "parameters", "expression".
struct AstNode {
    std::string kind;
    std::string role;
    std::int64_t id = -1;
    SrcSpan span;
    std::vector<AstNode> children;
    std::map<std::string, AstAttr, std::less<>> attributes;

    const std::string* str(std::string_view key) const;
    std::optional<std::int64_t> integer(std::string_view key) const;
    std::optional<bool> boolean(std::string_view key) const;
    const std::vector<std::int64_t>* int_list(std::string_view key) const;

    const AstNode* child(std::string_view role_name) const;
    std::vector<const AstNode*> children_with_role(std::string_view role_name) const;

    template <typename F>
    void walk(F&& f) const {
        f(*this);
        for (const auto& c : children) c.walk(f);
    }
};

struct SourceFile {
    int id = 0;
    std::string path;
    std::string text;
};

struct CompilationUnit {
    std::string contract_name;
    std::vector<std::uint8_t> runtime_bytecode;  // metadata stripped
    std::vector<SourceMapEntry> source_map;      // one per instruction
    std::vector<Instruction> instructions;
    /// Synthetic "Root" node whose children are the SourceUnit nodes.
    AstNode ast;
    std::vector<SourceFile> sources;
    SemVer compiler_version;
    std::string version_origin;  // "metadata", "cbor" or "pragma"

    const SourceFile* source(int file_id) const;
    /// Source text for a span; empty when the span is generated or out of range.
    std::string_view snippet(const SrcSpan& span) const;
    /// The ContractDefinition node of the analyzed contract, if present.
    const AstNode* contract_node() const;
};

/// Decodes the compiler's compressed `s:l:f:j` map. Throws Error(MalformedItem).
std::vector<SourceMapEntry> decode_source_map(std::string_view encoded);
/// Inverse of decode_source_map under the same inheritance rules.
std::string encode_source_map(std::span<const SourceMapEntry> entries);

/// Removes the CBOR metadata trailer if one is present and well formed.
std::vector<std::uint8_t> strip_metadata(std::span<const std::uint8_t> bytecode);

/// Version bytes from the trailer's "solc" key (solc >= 0.5.9 writes it).
std::optional<SemVer> trailer_compiler_version(std::span<const std::uint8_t> bytecode);

std::vector<std::uint8_t> parse_hex_bytes(std::string_view hex);

/// Loads a standard-JSON output file or a per-contract artifact directory.
/// `contract` picks a contract by name; otherwise the most derived non-library
/// contract with runtime code is chosen.
CompilationUnit load_compilation(const std::filesystem::path& artifact_path,
                                 const std::optional<std::string>& contract = std::nullopt);

/// `pc: MNEMONIC immediate  ; snippet` per instruction.
std::string disassembly_listing(const CompilationUnit& unit);

}  // namespace sleepscan
