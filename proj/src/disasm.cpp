#include "sleepscan/disasm.hpp"

#include <algorithm>

#include "sleepscan/error.hpp"

namespace sleepscan {

namespace {

struct OpcodeTable {
    std::array<OpcodeInfo, 256> entries{};

    void set(std::uint8_t op, std::string_view name, std::uint8_t pops, std::uint8_t pushes, std::uint8_t imm = 0) {
        entries[op] = OpcodeInfo{name, pops, pushes, imm, true};
    }

    OpcodeTable() {
        using namespace opcodes;
        set(STOP, "STOP", 0, 0);
        set(ADD, "ADD", 2, 1);
        set(MUL, "MUL", 2, 1);
        set(SUB, "SUB", 2, 1);
        set(DIV, "DIV", 2, 1);
        set(SDIV, "SDIV", 2, 1);
        set(MOD, "MOD", 2, 1);
        set(SMOD, "SMOD", 2, 1);
        set(ADDMOD, "ADDMOD", 3, 1);
        set(MULMOD, "MULMOD", 3, 1);
        set(EXP, "EXP", 2, 1);
        set(SIGNEXTEND, "SIGNEXTEND", 2, 1);
        set(LT, "LT", 2, 1);
        set(GT, "GT", 2, 1);
        set(SLT, "SLT", 2, 1);
        set(SGT, "SGT", 2, 1);
        set(EQ, "EQ", 2, 1);
        set(ISZERO, "ISZERO", 1, 1);
        set(AND, "AND", 2, 1);
        set(OR, "OR", 2, 1);
        set(XOR, "XOR", 2, 1);
        set(NOT, "NOT", 1, 1);
        set(BYTE, "BYTE", 2, 1);
        set(SHL, "SHL", 2, 1);
        set(SHR, "SHR", 2, 1);
        set(SAR, "SAR", 2, 1);
        set(SHA3, "SHA3", 2, 1);
        set(ADDRESS, "ADDRESS", 0, 1);
        set(BALANCE, "BALANCE", 1, 1);
        set(ORIGIN, "ORIGIN", 0, 1);
        set(CALLER, "CALLER", 0, 1);
        set(CALLVALUE, "CALLVALUE", 0, 1);
        set(CALLDATALOAD, "CALLDATALOAD", 1, 1);
        set(CALLDATASIZE, "CALLDATASIZE", 0, 1);
        set(CALLDATACOPY, "CALLDATACOPY", 3, 0);
        set(CODESIZE, "CODESIZE", 0, 1);
        set(CODECOPY, "CODECOPY", 3, 0);
        set(GASPRICE, "GASPRICE", 0, 1);
        set(EXTCODESIZE, "EXTCODESIZE", 1, 1);
        set(EXTCODECOPY, "EXTCODECOPY", 4, 0);
        set(RETURNDATASIZE, "RETURNDATASIZE", 0, 1);
        set(RETURNDATACOPY, "RETURNDATACOPY", 3, 0);
        set(EXTCODEHASH, "EXTCODEHASH", 1, 1);
        set(BLOCKHASH, "BLOCKHASH", 1, 1);
        set(COINBASE, "COINBASE", 0, 1);
        set(TIMESTAMP, "TIMESTAMP", 0, 1);
        set(NUMBER, "NUMBER", 0, 1);
        set(DIFFICULTY, "DIFFICULTY", 0, 1);
        set(GASLIMIT, "GASLIMIT", 0, 1);
        set(CHAINID, "CHAINID", 0, 1);
        set(SELFBALANCE, "SELFBALANCE", 0, 1);
        set(BASEFEE, "BASEFEE", 0, 1);
        set(0x49, "BLOBHASH", 1, 1);
        set(0x4a, "BLOBBASEFEE", 0, 1);
        set(POP, "POP", 1, 0);
        set(MLOAD, "MLOAD", 1, 1);
        set(MSTORE, "MSTORE", 2, 0);
        set(MSTORE8, "MSTORE8", 2, 0);
        set(SLOAD, "SLOAD", 1, 1);
        set(SSTORE, "SSTORE", 2, 0);
        set(JUMP, "JUMP", 1, 0);
        set(JUMPI, "JUMPI", 2, 0);
        set(PC, "PC", 0, 1);
        set(MSIZE, "MSIZE", 0, 1);
        set(GAS, "GAS", 0, 1);
        set(JUMPDEST, "JUMPDEST", 0, 0);
        set(TLOAD, "TLOAD", 1, 1);
        set(TSTORE, "TSTORE", 2, 0);
        set(MCOPY, "MCOPY", 3, 0);
        set(PUSH0, "PUSH0", 0, 1);
        static constexpr std::string_view push_names[] = {
            "PUSH1", "PUSH2", "PUSH3", "PUSH4", "PUSH5", "PUSH6", "PUSH7", "PUSH8",
            "PUSH9", "PUSH10", "PUSH11", "PUSH12", "PUSH13", "PUSH14", "PUSH15", "PUSH16",
            "PUSH17", "PUSH18", "PUSH19", "PUSH20", "PUSH21", "PUSH22", "PUSH23", "PUSH24",
            "PUSH25", "PUSH26", "PUSH27", "PUSH28", "PUSH29", "PUSH30", "PUSH31", "PUSH32"};
        static constexpr std::string_view dup_names[] = {
            "DUP1", "DUP2", "DUP3", "DUP4", "DUP5", "DUP6", "DUP7", "DUP8",
            "DUP9", "DUP10", "DUP11", "DUP12", "DUP13", "DUP14", "DUP15", "DUP16"};
        static constexpr std::string_view swap_names[] = {
            "SWAP1", "SWAP2", "SWAP3", "SWAP4", "SWAP5", "SWAP6", "SWAP7", "SWAP8",
            "SWAP9", "SWAP10", "SWAP11", "SWAP12", "SWAP13", "SWAP14", "SWAP15", "SWAP16"};
        for (std::uint8_t i = 0; i < 32; ++i) set(static_cast<std::uint8_t>(PUSH1 + i), push_names[i], 0, 1, static_cast<std::uint8_t>(i + 1));
        for (std::uint8_t i = 0; i < 16; ++i) {
            set(static_cast<std::uint8_t>(DUP1 + i), dup_names[i], static_cast<std::uint8_t>(i + 1), static_cast<std::uint8_t>(i + 2));
            set(static_cast<std::uint8_t>(SWAP1 + i), swap_names[i], static_cast<std::uint8_t>(i + 2), static_cast<std::uint8_t>(i + 2));
        }
        static constexpr std::string_view log_names[] = {"LOG0", "LOG1", "LOG2", "LOG3", "LOG4"};
        for (std::uint8_t i = 0; i < 5; ++i) set(static_cast<std::uint8_t>(LOG0 + i), log_names[i], static_cast<std::uint8_t>(i + 2), 0);
        set(CREATE, "CREATE", 3, 1);
        set(CALL, "CALL", 7, 1);
        set(CALLCODE, "CALLCODE", 7, 1);
        set(RETURN, "RETURN", 2, 0);
        set(DELEGATECALL, "DELEGATECALL", 6, 1);
        set(CREATE2, "CREATE2", 4, 1);
        set(STATICCALL, "STATICCALL", 6, 1);
        set(REVERT, "REVERT", 2, 0);
        set(INVALID, "INVALID", 0, 0);
        set(SELFDESTRUCT, "SELFDESTRUCT", 1, 0);
    }
};

const OpcodeTable& table() {
    static const OpcodeTable t;
    return t;
}

Terminator terminator_of(std::uint8_t op) {
    using namespace opcodes;
    switch (op) {
        case JUMP: return Terminator::Jump;
        case JUMPI: return Terminator::ConditionalJump;
        case STOP: return Terminator::Stop;
        case RETURN: return Terminator::Return;
        case REVERT: return Terminator::Revert;
        case SELFDESTRUCT: return Terminator::SelfDestruct;
        case INVALID: return Terminator::Invalid;
        default: return opcode_info(op).defined ? Terminator::Fallthrough : Terminator::Invalid;
    }
}

bool ends_block(std::uint8_t op) {
    using namespace opcodes;
    return op == JUMP || op == JUMPI || is_halting(op);
}

}  // namespace

const OpcodeInfo& opcode_info(std::uint8_t opcode) { return table().entries[opcode]; }

bool is_halting(std::uint8_t op) {
    using namespace opcodes;
    return op == STOP || op == RETURN || op == REVERT || op == INVALID || op == SELFDESTRUCT || !opcode_info(op).defined;
}

std::string_view Instruction::mnemonic() const {
    const auto& info = opcode_info(opcode);
    return info.defined ? info.name : std::string_view("INVALID");
}

std::string_view to_string(Terminator t) {
    switch (t) {
        case Terminator::Jump: return "jump";
        case Terminator::ConditionalJump: return "conditional-jump";
        case Terminator::Stop: return "stop";
        case Terminator::Return: return "return";
        case Terminator::Revert: return "revert";
        case Terminator::Invalid: return "invalid";
        case Terminator::SelfDestruct: return "selfdestruct";
        case Terminator::Fallthrough: return "fallthrough";
    }
    return "?";
}

std::string_view to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::Fall: return "fall";
        case EdgeKind::Taken: return "taken";
        case EdgeKind::NotTaken: return "not-taken";
    }
    return "?";
}

std::vector<Instruction> disassemble(std::span<const std::uint8_t> code, SemVer version) {
    std::vector<Instruction> out;
    out.reserve(code.size() / 2);
    std::size_t pc = 0;
    while (pc < code.size()) {
        Instruction ins;
        ins.pc = static_cast<std::uint32_t>(pc);
        ins.opcode = code[pc];
        ins.src = static_cast<std::uint32_t>(out.size());
        const std::uint8_t width = opcode_info(ins.opcode).immediate;
        if (pc + 1 + width > code.size()) {
            throw Error(ErrorCode::TruncatedPush,
                        "PUSH" + std::to_string(width) + " at pc " + std::to_string(pc) + " needs " + std::to_string(width) +
                            " immediate bytes, " + std::to_string(code.size() - pc - 1) + " left (compiler " + version.str() + ")");
        }
        ins.immediate_size = width;
        std::copy_n(code.begin() + static_cast<std::ptrdiff_t>(pc + 1), width, ins.immediate.begin());
        out.push_back(ins);
        pc += 1 + width;
    }
    return out;
}

std::optional<std::size_t> Cfg::block_at(std::uint32_t pc) const {
    if (pc >= pc_to_block.size() || pc_to_block[pc] < 0) return std::nullopt;
    return static_cast<std::size_t>(pc_to_block[pc]);
}

std::optional<std::size_t> Cfg::instruction_at(std::uint32_t pc) const {
    if (pc >= pc_to_instruction.size() || pc_to_instruction[pc] < 0) return std::nullopt;
    return static_cast<std::size_t>(pc_to_instruction[pc]);
}

bool Cfg::is_jumpdest(std::uint32_t pc) const {
    const auto idx = instruction_at(pc);
    return idx && instructions[*idx].opcode == opcodes::JUMPDEST;
}

Cfg build_cfg(std::vector<Instruction> instrs) {
    Cfg cfg;
    cfg.instructions = std::move(instrs);
    const auto& ins = cfg.instructions;
    const std::uint32_t code_end = ins.empty() ? 0 : ins.back().next_pc();
    cfg.pc_to_instruction.assign(code_end, -1);
    cfg.pc_to_block.assign(code_end, -1);
    for (std::size_t i = 0; i < ins.size(); ++i) cfg.pc_to_instruction[ins[i].pc] = static_cast<std::int32_t>(i);

    // Partition.
    std::size_t start = 0;
    for (std::size_t i = 0; i < ins.size(); ++i) {
        const bool next_is_dest = i + 1 < ins.size() && ins[i + 1].opcode == opcodes::JUMPDEST;
        if (ends_block(ins[i].opcode) || next_is_dest || i + 1 == ins.size()) {
            BasicBlock b;
            b.start_pc = ins[start].pc;
            b.first = start;
            b.last = i + 1;
            b.terminator = ends_block(ins[i].opcode) ? terminator_of(ins[i].opcode) : Terminator::Fallthrough;
            cfg.blocks.push_back(b);
            start = i + 1;
        }
    }
    for (std::size_t b = 0; b < cfg.blocks.size(); ++b) {
        cfg.pc_to_block[cfg.blocks[b].start_pc] = static_cast<std::int32_t>(b);
    }

    // Static edges: fallthrough plus the adjacent `PUSH target; JUMP(I)` pattern.
    for (std::size_t b = 0; b < cfg.blocks.size(); ++b) {
        const BasicBlock& blk = cfg.blocks[b];
        const Instruction& last = ins[blk.last - 1];
        const bool has_next = b + 1 < cfg.blocks.size();
        if (blk.terminator == Terminator::Fallthrough && has_next) {
            cfg.static_edges.push_back({b, b + 1, EdgeKind::Fall});
        }
        if (blk.terminator == Terminator::Jump || blk.terminator == Terminator::ConditionalJump) {
            bool resolved = false;
            if (blk.last - blk.first >= 2) {
                const Instruction& push = ins[blk.last - 2];
                if (is_push(push.opcode)) {
                    const U256 target = push.push_value();
                    if (target.fits_u64() && target.low64() < code_end && cfg.is_jumpdest(static_cast<std::uint32_t>(target.low64()))) {
                        const auto tb = cfg.block_at(static_cast<std::uint32_t>(target.low64()));
                        if (tb) {
                            cfg.static_edges.push_back({b, *tb, EdgeKind::Taken});
                            resolved = true;
                        }
                    }
                }
            }
            if (!resolved) cfg.unresolved_jumps.push_back(b);
            if (blk.terminator == Terminator::ConditionalJump && has_next) {
                cfg.static_edges.push_back({b, b + 1, EdgeKind::NotTaken});
            }
        }
        (void)last;
    }

    // Dispatcher: PUSH4 selector, EQ within the next two instructions, then PUSH tag; JUMPI.
    for (std::size_t i = 0; i + 3 < ins.size(); ++i) {
        if (ins[i].opcode != opcodes::PUSH4) continue;
        for (std::size_t k = i + 1; k <= i + 2 && k + 2 < ins.size(); ++k) {
            if (ins[k].opcode != opcodes::EQ) continue;
            const Instruction& push = ins[k + 1];
            if (!is_push(push.opcode) || ins[k + 2].opcode != opcodes::JUMPI) break;
            const U256 target = push.push_value();
            if (!target.fits_u64() || target.low64() >= code_end) break;
            const auto pc = static_cast<std::uint32_t>(target.low64());
            if (!cfg.is_jumpdest(pc)) break;
            const auto selector = static_cast<std::uint32_t>(ins[i].push_value().low64());
            cfg.entry_points.emplace(selector, pc);
            break;
        }
    }
    return cfg;
}

std::optional<std::uint32_t> find_function_entry(const Cfg& cfg, std::uint32_t selector) {
    const auto it = cfg.entry_points.find(selector);
    if (it == cfg.entry_points.end()) return std::nullopt;
    return it->second;
}

}  // namespace sleepscan
