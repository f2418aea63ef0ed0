#include <doctest.h>

#include "fixtures.hpp"
#include "sleepscan/disasm.hpp"
#include "sleepscan/error.hpp"
#include "sleepscan/ingest.hpp"

using namespace sleepscan;

namespace {
const SemVer v0817{0, 8, 17};
}

TEST_CASE("disassemble push add") {
    const std::vector<std::uint8_t> code{0x60, 0x01, 0x60, 0x02, 0x01};
    const auto ins = disassemble(code, v0817);
    REQUIRE(ins.size() == 3);
    CHECK(ins[0].mnemonic() == "PUSH1");
    CHECK(ins[0].push_value() == U256(1));
    CHECK(ins[1].pc == 2);
    CHECK(ins[1].push_value() == U256(2));
    CHECK(ins[2].mnemonic() == "ADD");
    CHECK(ins[2].immediate_size == 0);
}

TEST_CASE("disassemble push0 for any version") {
    const std::vector<std::uint8_t> code{0x5f};
    for (const SemVer v : {SemVer{0, 8, 21}, SemVer{0, 4, 26}}) {
        const auto ins = disassemble(code, v);
        REQUIRE(ins.size() == 1);
        CHECK(ins[0].mnemonic() == "PUSH0");
        CHECK(ins[0].immediate_size == 0);
    }
}

TEST_CASE("disassemble truncated push") {
    const std::vector<std::uint8_t> code{0x61, 0xff};
    try {
        disassemble(code, v0817);
        FAIL("expected TruncatedPush");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TruncatedPush);
    }
}

TEST_CASE("unknown opcodes decode without error") {
    const std::vector<std::uint8_t> code{0x0c, 0xfe, 0x00};
    const auto ins = disassemble(code, v0817);
    REQUIRE(ins.size() == 3);
    const auto cfg = build_cfg(ins);
    CHECK(cfg.blocks.size() == 3);
    CHECK(cfg.blocks[0].terminator == Terminator::Invalid);
    CHECK(cfg.blocks[1].terminator == Terminator::Invalid);
    CHECK(cfg.blocks[2].terminator == Terminator::Stop);
}

TEST_CASE("build_cfg straight line") {
    const std::vector<std::uint8_t> code{0x60, 0x01, 0x60, 0x02, 0x01, 0x00};
    const auto cfg = build_cfg(disassemble(code, v0817));
    CHECK(cfg.blocks.size() == 1);
    CHECK(cfg.static_edges.empty());
    CHECK(cfg.blocks[0].terminator == Terminator::Stop);
}

TEST_CASE("build_cfg resolves push jump") {
    // PUSH1 4; JUMP; INVALID; JUMPDEST; STOP
    const std::vector<std::uint8_t> code{0x60, 0x04, 0x56, 0xfe, 0x5b, 0x00};
    const auto cfg = build_cfg(disassemble(code, v0817));
    REQUIRE(cfg.blocks.size() == 3);
    REQUIRE(cfg.static_edges.size() == 1);
    CHECK(cfg.static_edges[0].from == 0);
    CHECK(cfg.blocks[cfg.static_edges[0].to].start_pc == 4);
    CHECK(cfg.static_edges[0].kind == EdgeKind::Taken);
}

TEST_CASE("build_cfg conditional jump has two edges") {
    // PUSH1 1; PUSH1 7; JUMPI; STOP; STOP; JUMPDEST; STOP
    const std::vector<std::uint8_t> code{0x60, 0x01, 0x60, 0x07, 0x57, 0x00, 0x00, 0x5b, 0x00};
    const auto cfg = build_cfg(disassemble(code, v0817));
    int taken = 0, not_taken = 0;
    for (const auto& e : cfg.static_edges) {
        if (e.from != 0) continue;
        if (e.kind == EdgeKind::Taken) {
            ++taken;
            CHECK(cfg.blocks[e.to].start_pc == 7);
        }
        if (e.kind == EdgeKind::NotTaken) ++not_taken;
    }
    CHECK(taken == 1);
    CHECK(not_taken == 1);
}

TEST_CASE("build_cfg leaves dynamic jumps unresolved") {
    // CALLDATASIZE; JUMP
    const std::vector<std::uint8_t> code{0x36, 0x56};
    const auto cfg = build_cfg(disassemble(code, v0817));
    CHECK(cfg.unresolved_jumps.size() == 1);
}

TEST_CASE("cfg partition invariants on compiled fixtures") {
    for (const char* name : {"fig1_privileged_address", "fig2_unrestricted_from_v0426", "fig2_unrestricted_from_v0821"}) {
        const auto unit = load_compilation(test::artifact(name));
        std::size_t total = 0;
        for (const auto& i : unit.instructions) total += 1 + i.immediate_size;
        CHECK(total == unit.runtime_bytecode.size());
        const auto cfg = build_cfg(unit.instructions);
        std::size_t covered = 0;
        for (const auto& b : cfg.blocks) {
            covered += b.last - b.first;
            for (std::size_t k = b.first + 1; k < b.last; ++k) CHECK(cfg.instructions[k].opcode != opcodes::JUMPDEST);
        }
        CHECK(covered == cfg.instructions.size());
        for (const auto& e : cfg.static_edges) {
            if (e.kind == EdgeKind::Taken) CHECK(cfg.instructions[cfg.blocks[e.to].first].opcode == opcodes::JUMPDEST);
        }
        for (const auto& [sel, pc] : cfg.entry_points) CHECK(cfg.is_jumpdest(pc));
    }
}

TEST_CASE("find_function_entry on compiled contracts") {
    for (const char* name : {"fig2_unrestricted_from", "fig2_unrestricted_from_v0426", "fig2_unrestricted_from_v0517",
                             "fig2_unrestricted_from_v0821"}) {
        const auto unit = load_compilation(test::artifact(name));
        const auto cfg = build_cfg(unit.instructions);
        const auto entry = find_function_entry(cfg, 0x23b872dd);
        REQUIRE(entry);
        CHECK(cfg.is_jumpdest(*entry));
        CHECK_FALSE(find_function_entry(cfg, 0xdeadbeef));
    }
}

TEST_CASE("push0 appears in 0.8.21 bytecode only") {
    auto count_push0 = [](const char* name) {
        const auto unit = load_compilation(test::artifact(name));
        std::size_t n = 0;
        for (const auto& i : unit.instructions) n += i.opcode == opcodes::PUSH0;
        return n;
    };
    CHECK(count_push0("fig2_unrestricted_from_v0821") > 0);
    CHECK(count_push0("fig2_unrestricted_from") == 0);
}

TEST_CASE("listing shows source snippets") {
    const auto unit = load_compilation(test::artifact("fig2_unrestricted_from"));
    const auto text = disassembly_listing(unit);
    CHECK(text.find("0: PUSH1 0x80") == 0);
    CHECK(text.find("; ") != std::string::npos);
}
