#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sleepscan/u256.hpp"
#include "sleepscan/version.hpp"

namespace sleepscan {

namespace opcodes {
inline constexpr std::uint8_t STOP = 0x00;
inline constexpr std::uint8_t ADD = 0x01;
inline constexpr std::uint8_t MUL = 0x02;
inline constexpr std::uint8_t SUB = 0x03;
inline constexpr std::uint8_t DIV = 0x04;
inline constexpr std::uint8_t SDIV = 0x05;
inline constexpr std::uint8_t MOD = 0x06;
inline constexpr std::uint8_t SMOD = 0x07;
inline constexpr std::uint8_t ADDMOD = 0x08;
inline constexpr std::uint8_t MULMOD = 0x09;
inline constexpr std::uint8_t EXP = 0x0a;
inline constexpr std::uint8_t SIGNEXTEND = 0x0b;
inline constexpr std::uint8_t LT = 0x10;
inline constexpr std::uint8_t GT = 0x11;
inline constexpr std::uint8_t SLT = 0x12;
inline constexpr std::uint8_t SGT = 0x13;
inline constexpr std::uint8_t EQ = 0x14;
inline constexpr std::uint8_t ISZERO = 0x15;
inline constexpr std::uint8_t AND = 0x16;
inline constexpr std::uint8_t OR = 0x17;
inline constexpr std::uint8_t XOR = 0x18;
inline constexpr std::uint8_t NOT = 0x19;
inline constexpr std::uint8_t BYTE = 0x1a;
inline constexpr std::uint8_t SHL = 0x1b;
inline constexpr std::uint8_t SHR = 0x1c;
inline constexpr std::uint8_t SAR = 0x1d;
inline constexpr std::uint8_t SHA3 = 0x20;
inline constexpr std::uint8_t ADDRESS = 0x30;
inline constexpr std::uint8_t BALANCE = 0x31;
inline constexpr std::uint8_t ORIGIN = 0x32;
inline constexpr std::uint8_t CALLER = 0x33;
inline constexpr std::uint8_t CALLVALUE = 0x34;
inline constexpr std::uint8_t CALLDATALOAD = 0x35;
inline constexpr std::uint8_t CALLDATASIZE = 0x36;
inline constexpr std::uint8_t CALLDATACOPY = 0x37;
inline constexpr std::uint8_t CODESIZE = 0x38;
inline constexpr std::uint8_t CODECOPY = 0x39;
inline constexpr std::uint8_t GASPRICE = 0x3a;
inline constexpr std::uint8_t EXTCODESIZE = 0x3b;
inline constexpr std::uint8_t EXTCODECOPY = 0x3c;
inline constexpr std::uint8_t RETURNDATASIZE = 0x3d;
inline constexpr std::uint8_t RETURNDATACOPY = 0x3e;
inline constexpr std::uint8_t EXTCODEHASH = 0x3f;
inline constexpr std::uint8_t BLOCKHASH = 0x40;
inline constexpr std::uint8_t COINBASE = 0x41;
inline constexpr std::uint8_t TIMESTAMP = 0x42;
inline constexpr std::uint8_t NUMBER = 0x43;
inline constexpr std::uint8_t DIFFICULTY = 0x44;
inline constexpr std::uint8_t GASLIMIT = 0x45;
inline constexpr std::uint8_t CHAINID = 0x46;
inline constexpr std::uint8_t SELFBALANCE = 0x47;
inline constexpr std::uint8_t BASEFEE = 0x48;
inline constexpr std::uint8_t POP = 0x50;
inline constexpr std::uint8_t MLOAD = 0x51;
inline constexpr std::uint8_t MSTORE = 0x52;
inline constexpr std::uint8_t MSTORE8 = 0x53;
inline constexpr std::uint8_t SLOAD = 0x54;
inline constexpr std::uint8_t SSTORE = 0x55;
inline constexpr std::uint8_t JUMP = 0x56;
inline constexpr std::uint8_t JUMPI = 0x57;
inline constexpr std::uint8_t PC = 0x58;
inline constexpr std::uint8_t MSIZE = 0x59;
inline constexpr std::uint8_t GAS = 0x5a;
inline constexpr std::uint8_t JUMPDEST = 0x5b;
inline constexpr std::uint8_t TLOAD = 0x5c;
inline constexpr std::uint8_t TSTORE = 0x5d;
inline constexpr std::uint8_t MCOPY = 0x5e;
inline constexpr std::uint8_t PUSH0 = 0x5f;
inline constexpr std::uint8_t PUSH1 = 0x60;
inline constexpr std::uint8_t PUSH4 = 0x63;
inline constexpr std::uint8_t PUSH32 = 0x7f;
inline constexpr std::uint8_t DUP1 = 0x80;
inline constexpr std::uint8_t DUP16 = 0x8f;
inline constexpr std::uint8_t SWAP1 = 0x90;
inline constexpr std::uint8_t SWAP16 = 0x9f;
inline constexpr std::uint8_t LOG0 = 0xa0;
inline constexpr std::uint8_t LOG4 = 0xa4;
inline constexpr std::uint8_t CREATE = 0xf0;
inline constexpr std::uint8_t CALL = 0xf1;
inline constexpr std::uint8_t CALLCODE = 0xf2;
inline constexpr std::uint8_t RETURN = 0xf3;
inline constexpr std::uint8_t DELEGATECALL = 0xf4;
inline constexpr std::uint8_t CREATE2 = 0xf5;
inline constexpr std::uint8_t STATICCALL = 0xfa;
inline constexpr std::uint8_t REVERT = 0xfd;
inline constexpr std::uint8_t INVALID = 0xfe;
inline constexpr std::uint8_t SELFDESTRUCT = 0xff;
}  // namespace opcodes

struct OpcodeInfo {
    std::string_view name;  // empty for undefined bytes
    std::uint8_t pops = 0;
    std::uint8_t pushes = 0;
    std::uint8_t immediate = 0;
    bool defined = false;
};

const OpcodeInfo& opcode_info(std::uint8_t opcode);

inline bool is_push(std::uint8_t op) { return op >= opcodes::PUSH0 && op <= opcodes::PUSH32; }
inline bool is_log(std::uint8_t op) { return op >= opcodes::LOG0 && op <= opcodes::LOG4; }
/// Ends the current path (or block) unconditionally.
bool is_halting(std::uint8_t op);

struct Instruction {
    std::uint32_t pc = 0;
    std::uint8_t opcode = 0;
    std::uint8_t immediate_size = 0;
    std::array<std::uint8_t, 32> immediate{};
    /// Index into the unit's source map (one entry per instruction).
    std::uint32_t src = 0;

    std::span<const std::uint8_t> immediate_bytes() const { return {immediate.data(), immediate_size}; }
    /// Value pushed by PUSH0..PUSH32.
    U256 push_value() const { return U256::from_be_bytes(immediate_bytes()); }
    std::string_view mnemonic() const;
    std::uint32_t next_pc() const { return pc + 1 + immediate_size; }
};

/// Decodes metadata-stripped runtime code. 0x5F is PUSH0 for every version; the
/// version is only carried for diagnostics. Throws Error(TruncatedPush).
std::vector<Instruction> disassemble(std::span<const std::uint8_t> code, SemVer version);

enum class Terminator { Jump, ConditionalJump, Stop, Return, Revert, Invalid, SelfDestruct, Fallthrough };
enum class EdgeKind { Fall, Taken, NotTaken };

std::string_view to_string(Terminator t);
std::string_view to_string(EdgeKind k);

struct BasicBlock {
    std::uint32_t start_pc = 0;
    /// Half-open range into Cfg::instructions.
    std::size_t first = 0;
    std::size_t last = 0;
    Terminator terminator = Terminator::Fallthrough;
};

struct CfgEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    EdgeKind kind = EdgeKind::Fall;
};

struct Cfg {
    std::vector<Instruction> instructions;
    std::vector<BasicBlock> blocks;
    std::vector<CfgEdge> static_edges;
    /// Dispatcher table: 4-byte selector -> JUMPDEST pc of the function wrapper.
    std::map<std::uint32_t, std::uint32_t> entry_points;
    /// Blocks ending in a jump whose target is not a pushed constant.
    std::vector<std::size_t> unresolved_jumps;

    std::optional<std::size_t> block_at(std::uint32_t pc) const;
    /// Instruction index for a pc, or nullopt when pc is inside an immediate or out of range.
    std::optional<std::size_t> instruction_at(std::uint32_t pc) const;
    bool is_jumpdest(std::uint32_t pc) const;

    std::vector<std::int32_t> pc_to_instruction;
    std::vector<std::int32_t> pc_to_block;
};

Cfg build_cfg(std::vector<Instruction> instrs);

std::optional<std::uint32_t> find_function_entry(const Cfg& cfg, std::uint32_t selector);

}  // namespace sleepscan
