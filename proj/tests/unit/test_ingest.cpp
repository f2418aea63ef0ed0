#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "fixtures.hpp"
#include "sleepscan/error.hpp"
#include "sleepscan/ingest.hpp"

using namespace sleepscan;
namespace fs = std::filesystem;

namespace {

// Writes a format-B directory from a standard-JSON fixture, optionally
// dropping map items or the trailer.
fs::path export_dir(const std::string& artifact, const std::string& contract, const std::string& dirname,
                    int drop_map_items = 0, int extra_map_items = 0, bool keep_trailer = true) {
    std::ifstream in(test::artifact(artifact));
    const auto j = nlohmann::json::parse(in);
    const fs::path dir = fs::temp_directory_path() / ("sleepscan_" + dirname);
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string file_of;
    for (const auto& [file, byname] : j["contracts"].items()) {
        if (byname.contains(contract)) file_of = file;
    }
    const auto& evm = j["contracts"][file_of][contract]["evm"]["deployedBytecode"];
    std::string bin = evm["object"].get<std::string>();
    if (!keep_trailer) {
        const auto bytes = parse_hex_bytes(bin);
        const auto stripped = strip_metadata(bytes);
        bin = bin.substr(0, stripped.size() * 2);
    }
    std::string map = evm["sourceMap"].get<std::string>();
    for (int i = 0; i < drop_map_items; ++i) map = map.substr(0, map.rfind(';'));
    for (int i = 0; i < extra_map_items; ++i) map += ";";
    std::ofstream(dir / (contract + ".bin-runtime")) << bin;
    std::ofstream(dir / (contract + ".srcmap-runtime")) << map;
    std::ofstream(dir / (contract + ".ast.json")) << j["sources"][file_of]["ast"].dump();
    std::ofstream(dir / (contract + ".sol")) << j["sources"][file_of]["content"].get<std::string>();
    return dir;
}

}  // namespace

TEST_CASE("decode_source_map examples") {
    auto one = decode_source_map("0:78:0:-");
    REQUIRE(one.size() == 1);
    CHECK(one[0] == SourceMapEntry{0, 78, 0, JumpKind::Regular});

    auto three = decode_source_map("0:78:0:-;:;");
    REQUIRE(three.size() == 3);
    for (const auto& e : three) CHECK(e == SourceMapEntry{0, 78, 0, JumpKind::Regular});

    auto two = decode_source_map("0:10:0:-;5::1");
    REQUIRE(two.size() == 2);
    CHECK(two[1] == SourceMapEntry{5, 10, 1, JumpKind::Regular});

    CHECK(decode_source_map("").empty());
    CHECK(decode_source_map("1:2:-1:i;;:::o")[2].jump == JumpKind::ReturnFromFunction);
    CHECK(decode_source_map("1:2:-1:i;;:::o")[2].file == -1);
}

TEST_CASE("decode_source_map rejects malformed items") {
    CHECK_THROWS_AS(decode_source_map("0:x:0"), Error);
    CHECK_THROWS_AS(decode_source_map("0:1:0:q"), Error);
    try {
        decode_source_map("a");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MalformedItem);
    }
}

TEST_CASE("decode_source_map length equals separators plus one") {
    std::mt19937 rng(7);
    for (int n = 0; n < 50; ++n) {
        std::string s;
        const int items = 1 + static_cast<int>(rng() % 30);
        for (int i = 0; i < items; ++i) {
            if (i) s += ';';
            if (rng() % 3 == 0) continue;
            s += std::to_string(rng() % 500);
            if (rng() % 2) s += ":" + std::to_string(rng() % 50);
        }
        CHECK(decode_source_map(s).size() == static_cast<std::size_t>(std::count(s.begin(), s.end(), ';') + 1));
    }
}

TEST_CASE("source map round trip on fixtures") {
    std::ifstream in(test::artifact("fig1_privileged_address"));
    const auto j = nlohmann::json::parse(in);
    const std::string map = j["contracts"]["Fig1PrivilegedAddress.sol"]["Test"]["evm"]["deployedBytecode"]["sourceMap"];
    const auto entries = decode_source_map(map);
    CHECK(decode_source_map(encode_source_map(entries)) == entries);
}

TEST_CASE("strip_metadata examples") {
    const std::vector<std::uint8_t> plain{0x60, 0x01, 0x60, 0x01, 0x01};
    CHECK(strip_metadata(plain) == plain);
    const std::vector<std::uint8_t> zeros{0, 0};
    CHECK(strip_metadata(zeros) == zeros);

    std::ifstream in(test::artifact("fig2_unrestricted_from"));
    const auto j = nlohmann::json::parse(in);
    const auto code = parse_hex_bytes(j["contracts"]["Fig2UnrestrictedFrom.sol"]["Test"]["evm"]["deployedBytecode"]["object"].get<std::string>());
    REQUIRE(code.size() > 53);
    CHECK(code[code.size() - 2] == 0x00);
    CHECK(code[code.size() - 1] == 0x33);
    const auto stripped = strip_metadata(code);
    CHECK(stripped.size() == code.size() - 53);
    CHECK(strip_metadata(stripped) == stripped);
    CHECK(trailer_compiler_version(code) == SemVer{0, 8, 17});
}

TEST_CASE("strip_metadata handles legacy trailers") {
    for (const auto& [name, contract, trailer] : {std::tuple{"fig2_unrestricted_from_v0426", "Test", 41},
                                                  std::tuple{"fig2_unrestricted_from_v0517", "Test", 50}}) {
        std::ifstream in(test::artifact(name));
        const auto j = nlohmann::json::parse(in);
        for (const auto& [file, byname] : j["contracts"].items()) {
            if (!byname.contains(contract)) continue;
            const auto code = parse_hex_bytes(byname[contract]["evm"]["deployedBytecode"]["object"].get<std::string>());
            CHECK(strip_metadata(code).size() == code.size() - trailer - 2);
        }
    }
}

TEST_CASE("load_compilation standard json") {
    const auto unit = load_compilation(test::artifact("clean_collection"));
    CHECK(unit.contract_name == "CleanCollection");
    CHECK(unit.sources.size() == 3);
    CHECK(unit.compiler_version == SemVer{0, 8, 17});
    CHECK(unit.version_origin == "metadata");
    CHECK(unit.source_map.size() == unit.instructions.size());
    for (const auto& e : unit.source_map) {
        if (e.file < 0) continue;
        const auto* src = unit.source(e.file);
        REQUIRE(src);
        CHECK(static_cast<std::size_t>(e.start + e.length) <= src->text.size());
    }
    REQUIRE(unit.contract_node());
    CHECK(*unit.contract_node()->str("name") == "CleanCollection");
}

TEST_CASE("load_compilation picks the derived contract and honours overrides") {
    CHECK(load_compilation(test::artifact("fig3_owner_inconsistency")).contract_name == "ChubbyBunny");
    CHECK(load_compilation(test::artifact("fp_remote_transfer")).contract_name == "RemoteTransfer");
    CHECK(load_compilation(test::artifact("fig3_owner_inconsistency"), "ERC721Lite").contract_name == "ERC721Lite");
    CHECK_THROWS_AS(load_compilation(test::artifact("fig3_owner_inconsistency"), "Nope"), Error);
}

TEST_CASE("load_compilation directory format with pragma version") {
    const auto dir = export_dir("fn_log1_transfer", "IslandsToken", "pragma");
    const auto unit = load_compilation(dir);
    CHECK(unit.contract_name == "IslandsToken");
    CHECK(unit.version_origin == "pragma");
    CHECK(unit.compiler_version == SemVer{0, 4, 24});
    fs::remove_all(dir);
}

TEST_CASE("load_compilation directory format reads the trailer version") {
    const auto dir = export_dir("fig2_unrestricted_from_v0821", "Test", "cbor");
    const auto unit = load_compilation(dir);
    CHECK(unit.version_origin == "cbor");
    CHECK(unit.compiler_version == SemVer{0, 8, 21});
    fs::remove_all(dir);
}

TEST_CASE("load_compilation map length mismatch") {
    // Bytecode ends with INVALID, so the map has one item fewer than instructions;
    // one extra item makes the counts disagree in the other direction.
    const auto dir = export_dir("fig2_unrestricted_from", "Test", "mismatch", 0, 2, false);
    try {
        load_compilation(dir);
        FAIL("expected MapLengthMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MapLengthMismatch);
    }
    const auto dir2 = export_dir("fig2_unrestricted_from", "Test", "mismatch2", 5, 0, false);
    try {
        load_compilation(dir2);
        FAIL("expected MapLengthMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MapLengthMismatch);
    }
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("load_compilation missing artifacts") {
    const fs::path dir = fs::temp_directory_path() / "sleepscan_empty";
    fs::create_directories(dir);
    try {
        load_compilation(dir);
        FAIL("expected MissingArtifact");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingArtifact);
    }
    fs::remove_all(dir);
}

TEST_CASE("ast spans nest") {
    const auto unit = load_compilation(test::artifact("fig1_privileged_address"));
    std::size_t checked = 0;
    std::function<void(const AstNode&)> rec = [&](const AstNode& n) {
        for (const auto& c : n.children) {
            if (n.kind != "Root" && c.span.file >= 0 && n.span.file >= 0) {
                const bool inside = n.span.contains(c.span);
                const bool disjoint = c.span.end() <= n.span.start || c.span.start >= n.span.end() || c.span.file != n.span.file;
                CHECK((inside || disjoint));
                ++checked;
            }
            rec(c);
        }
    };
    rec(unit.ast);
    CHECK(checked > 100);
}

TEST_CASE("source map round trip on random maps") {
    std::mt19937_64 rng(7);
    const JumpKind kinds[] = {JumpKind::Regular, JumpKind::IntoFunction, JumpKind::ReturnFromFunction};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<SourceMapEntry> entries;
        const int n = 1 + static_cast<int>(rng() % 60);
        SourceMapEntry cur{static_cast<std::int64_t>(rng() % 500), static_cast<std::int64_t>(rng() % 80), 0, JumpKind::Regular};
        for (int i = 0; i < n; ++i) {
            // Mostly repeats so the delta rules get exercised.
            if (rng() % 3 == 0) cur.start = static_cast<std::int64_t>(rng() % 5000);
            if (rng() % 3 == 0) cur.length = static_cast<std::int64_t>(rng() % 300);
            if (rng() % 5 == 0) cur.file = static_cast<int>(rng() % 4) - 1;
            if (rng() % 4 == 0) cur.jump = kinds[rng() % 3];
            entries.push_back(cur);
        }
        const auto text = encode_source_map(entries);
        INFO(text);
        REQUIRE(decode_source_map(text) == entries);
    }
}
