#include "sleepscan/symexec.hpp"

#include <algorithm>
#include <cctype>

#include "sleepscan/error.hpp"
#include "sleepscan/keccak.hpp"

namespace sleepscan {

std::string_view to_string(Diagnostic d) {
    switch (d) {
        case Diagnostic::StackUnderflow: return "stack-underflow";
        case Diagnostic::StackOverflow: return "stack-overflow";
        case Diagnostic::UnknownJumpTarget: return "unknown-jump-target";
        case Diagnostic::InvalidJumpTarget: return "invalid-jump-target";
        case Diagnostic::LoopBound: return "loop-bound";
        case Diagnostic::StepBudget: return "step-budget";
        case Diagnostic::PathBudget: return "path-budget";
        case Diagnostic::Timeout: return "timeout";
    }
    return "?";
}

std::string_view to_string(EndKind k) {
    switch (k) {
        case EndKind::TransferEmission: return "transfer-emission";
        case EndKind::NormalExit: return "normal-exit";
        case EndKind::Revert: return "revert";
        case EndKind::BudgetExhausted: return "budget-exhausted";
    }
    return "?";
}

std::optional<SrcSpan> ExecContext::span_at(std::uint32_t pc) const {
    if (!unit || !cfg) return std::nullopt;
    const auto idx = cfg->instruction_at(pc);
    if (!idx) return std::nullopt;
    const auto src = cfg->instructions[*idx].src;
    if (src >= unit->source_map.size()) return std::nullopt;
    return SrcSpan::of(unit->source_map[src]);
}

std::optional<JumpKind> ExecContext::jump_at(std::uint32_t pc) const {
    if (!unit || !cfg) return std::nullopt;
    const auto idx = cfg->instruction_at(pc);
    if (!idx) return std::nullopt;
    const auto src = cfg->instructions[*idx].src;
    if (src >= unit->source_map.size()) return std::nullopt;
    return unit->source_map[src].jump;
}

namespace {

using namespace opcodes;

const U256& transfer_topic() {
    static const U256 h = U256::from_be_bytes(keccak256(std::string_view("Transfer(address,address,uint256)")));
    return h;
}

unsigned abi_bits(std::string_view type) {
    if (type == "address") return 160;
    if (type == "bool") return 1;
    if (type.starts_with("uint") && type.size() > 4 && type.find('[') == std::string_view::npos) {
        unsigned n = 0;
        for (char ch : type.substr(4)) {
            if (!std::isdigit(static_cast<unsigned char>(ch))) return 256;
            n = n * 10 + static_cast<unsigned>(ch - '0');
        }
        return n > 0 && n <= 256 ? n : 256;
    }
    return 256;
}

Expr pop(MachineState& s) {
    if (s.stack.empty()) throw PathError(Diagnostic::StackUnderflow, "stack underflow at pc " + std::to_string(s.pc));
    Expr v = std::move(s.stack.back());
    s.stack.pop_back();
    return v;
}

void push(MachineState& s, Expr v) {
    if (s.stack.size() >= 1024) throw PathError(Diagnostic::StackOverflow, "stack overflow at pc " + std::to_string(s.pc));
    s.stack.push_back(std::move(v));
}

void need(const MachineState& s, std::size_t n) {
    if (s.stack.size() < n) throw PathError(Diagnostic::StackUnderflow, "stack underflow at pc " + std::to_string(s.pc));
}

std::optional<std::uint64_t> small_const(const Expr& e) {
    if (e->op != Op::Const || !e->value.fits_u64() || e->value.low64() > (1ULL << 32)) return std::nullopt;
    return e->value.low64();
}

// base + constant decomposition of an offset.
std::pair<Expr, U256> split_offset(const Expr& e) {
    if (e->op == Op::Add && expr::is_const(e->args[1])) return {e->args[0], e->args[1]->value};
    return {e, U256()};
}

// True when [a, a+an) and [b, b+bn) are provably disjoint.
bool disjoint(const Expr& a, std::uint64_t an, const Expr& b, std::uint64_t bn) {
    const auto ca = small_const(a);
    const auto cb = small_const(b);
    if (ca && cb) return *ca + an <= *cb || *cb + bn <= *ca;
    if (ca || cb) return false;
    const auto [ba, oa] = split_offset(a);
    const auto [bb, ob] = split_offset(b);
    if (!expr::equal(ba, bb)) return false;
    const U256 d1 = ob - oa;  // b - a
    const U256 d2 = oa - ob;
    return (d1.fits_u64() && d1.low64() >= an && d1.low64() < (1ULL << 40)) || (d2.fits_u64() && d2.low64() >= bn && d2.low64() < (1ULL << 40));
}

Expr fresh_memory(const MachineState& s, const Expr& offset) {
    return expr::var(VarKind::FreshExternal, static_cast<std::int64_t>(s.memory.size()), offset, "memory", "mem[...]", 256);
}

// Concrete bytes of [start, start+n), or nullopt when some byte is symbolic or unknown.
std::optional<std::vector<std::uint8_t>> concrete_bytes(const MachineState& s, std::uint64_t start, std::uint64_t n) {
    std::vector<std::uint8_t> out(n, 0);
    std::vector<char> done(n, 0);
    std::uint64_t remaining = n;
    for (auto it = s.memory.rbegin(); it != s.memory.rend() && remaining > 0; ++it) {
        const auto off = small_const(it->offset);
        if (!off) return std::nullopt;
        std::uint64_t len = 32;
        if (it->kind == MemWriteKind::Byte) len = 1;
        if (it->kind == MemWriteKind::Havoc) {
            const auto sz = small_const(it->size);
            if (!sz) return std::nullopt;
            len = *sz;
        }
        const std::uint64_t lo = std::max(start, *off);
        const std::uint64_t hi = std::min(start + n, *off + len);
        for (std::uint64_t p = lo; p < hi; ++p) {
            if (done[p - start]) continue;
            if (it->kind == MemWriteKind::Havoc || !expr::is_const(it->value)) return std::nullopt;
            const auto be = it->value->value.to_be_bytes();
            out[p - start] = it->kind == MemWriteKind::Byte ? be[31] : be[p - *off];
            done[p - start] = 1;
            --remaining;
        }
    }
    return out;
}

Expr mload(const MachineState& s, const Expr& offset) {
    for (auto it = s.memory.rbegin(); it != s.memory.rend(); ++it) {
        if (it->kind == MemWriteKind::Word && expr::equal(it->offset, offset)) return it->value;
        std::uint64_t len = 32;
        if (it->kind == MemWriteKind::Byte) len = 1;
        if (it->kind == MemWriteKind::Havoc) {
            const auto sz = small_const(it->size);
            if (sz && *sz == 0) continue;
            if (!sz) break;
            len = *sz;
        }
        if (!disjoint(it->offset, len, offset, 32)) break;
    }
    if (const auto c = small_const(offset)) {
        if (const auto bytes = concrete_bytes(s, *c, 32)) return expr::constant(U256::from_be_bytes(*bytes));
        return fresh_memory(s, offset);
    }
    // Every write was disjoint: fresh memory is zero.
    bool all_disjoint = true;
    for (const auto& w : s.memory) {
        std::uint64_t len = w.kind == MemWriteKind::Byte ? 1 : 32;
        if (w.kind == MemWriteKind::Havoc) {
            const auto sz = small_const(w.size);
            if (!sz) {
                all_disjoint = false;
                break;
            }
            len = *sz;
        }
        if (len && !disjoint(w.offset, len, offset, 32)) {
            all_disjoint = false;
            break;
        }
    }
    return all_disjoint ? expr::constant(U256()) : fresh_memory(s, offset);
}

Expr sha3(const MachineState& s, const Expr& offset, const Expr& size) {
    const auto sz = small_const(size);
    if (sz && *sz == 0) return expr::constant(U256::from_be_bytes(keccak256(std::span<const std::uint8_t>())));
    if (sz && *sz <= 1024) {
        if (const auto c = small_const(offset)) {
            if (const auto bytes = concrete_bytes(s, *c, *sz)) return expr::constant(U256::from_be_bytes(keccak256(*bytes)));
        }
        if (*sz % 32 == 0 && *sz <= 256) {
            std::vector<Expr> words;
            for (std::uint64_t i = 0; i < *sz; i += 32) words.push_back(mload(s, expr::add(offset, expr::constant(U256(i)))));
            return expr::make(Op::Sha3, std::move(words));
        }
    }
    return expr::make(Op::Sha3, {fresh_memory(s, offset), size});
}

void havoc(MachineState& s, Expr offset, Expr size) {
    if (const auto sz = small_const(size); sz && *sz == 0) return;
    s.memory.push_back(MemWrite{MemWriteKind::Havoc, std::move(offset), nullptr, std::move(size), static_cast<std::uint32_t>(s.memory.size())});
}

std::string storage_name(const ExecContext& ctx, std::uint32_t pc, bool mapping, const Expr& slot) {
    std::string text;
    if (ctx.unit) {
        if (const auto span = ctx.span_at(pc); span && span->file >= 0) text = std::string(ctx.unit->snippet(*span));
    }
    std::string out;
    int depth = 0;
    bool had_bracket = false;
    for (char ch : text) {
        if (ch == '[') {
            if (depth++ == 0) {
                had_bracket = true;
                if (mapping) out += "[...]";
            }
            continue;
        }
        if (ch == ']') {
            if (depth > 0) --depth;
            continue;
        }
        if (depth == 0 && !std::isspace(static_cast<unsigned char>(ch))) out += ch;
    }
    if (out.empty()) {
        out = "slot";
        if (const auto c = expr::as_const(slot)) out += "_" + c->to_hex();
    }
    if (mapping && !had_bracket) out += "[...]";
    return out;
}

Expr env_var(std::uint8_t op, std::string name, unsigned bits, Expr key = nullptr) {
    return expr::var(VarKind::Environment, op, std::move(key), "env", std::move(name), bits);
}

Expr fresh_var(MachineState& s, const std::string& origin, unsigned bits) {
    const auto n = s.fresh++;
    return expr::var(VarKind::FreshExternal, n, nullptr, origin, origin + "#" + std::to_string(n), bits);
}

void jump_to(const ExecContext& ctx, MachineState& s, const Expr& dest) {
    const auto d = small_const(dest);
    if (!d) throw PathError(Diagnostic::UnknownJumpTarget, "symbolic jump target at pc " + std::to_string(s.pc));
    if (!ctx.cfg->is_jumpdest(static_cast<std::uint32_t>(*d))) {
        throw PathError(Diagnostic::InvalidJumpTarget, "jump to non-JUMPDEST " + std::to_string(*d));
    }
    s.pc = static_cast<std::uint32_t>(*d);
}

Op binary_op(std::uint8_t op) {
    switch (op) {
        case ADD: return Op::Add;
        case MUL: return Op::Mul;
        case SUB: return Op::Sub;
        case DIV: return Op::Div;
        case SDIV: return Op::SDiv;
        case MOD: return Op::Mod;
        case SMOD: return Op::SMod;
        case EXP: return Op::Exp;
        case SIGNEXTEND: return Op::SignExtend;
        case LT: return Op::Lt;
        case SLT: return Op::Slt;
        case EQ: return Op::Eq;
        case AND: return Op::And;
        case OR: return Op::Or;
        case XOR: return Op::Xor;
        case BYTE: return Op::Byte;
        case SHL: return Op::Shl;
        case SHR: return Op::Shr;
        case SAR: return Op::Sar;
        default: return Op::Const;
    }
}

}  // namespace

Expr parameter_var(const FunctionInfo* fn, std::size_t index) {
    std::string name = "arg" + std::to_string(index);
    unsigned bits = 256;
    if (fn && index < fn->params.size()) {
        if (!fn->params[index].first.empty()) name = fn->params[index].first;
        bits = abi_bits(fn->params[index].second);
    }
    return expr::var(VarKind::Parameter, static_cast<std::int64_t>(index), nullptr, "calldata", name, bits);
}

MachineState initial_state(const ExecContext&) { return MachineState{}; }

Expr on_calldataload(const ExecContext& ctx, MachineState&, const Expr& offset) {
    if (const auto c = small_const(offset)) {
        if (*c == 0) return expr::constant(U256(ctx.selector) << 224);
        const std::size_t nparams = ctx.function ? ctx.function->params.size() : 0;
        if (*c >= 4 && (*c - 4) % 32 == 0 && (*c - 4) / 32 < nparams) return parameter_var(ctx.function, (*c - 4) / 32);
    }
    return expr::var(VarKind::FreshExternal, 0, offset, "calldata", "calldata[...]", 256);
}

void on_sstore(MachineState& s, const Expr& slot, const Expr& value) {
    s.sstore_mark = true;
    s.storage.push_back(StorageWrite{slot, value});
}

std::optional<EventEmission> on_log(const MachineState& s, int topic_count) {
    const std::size_t n = static_cast<std::size_t>(topic_count) + 2;
    if (s.stack.size() < n) return std::nullopt;
    const auto at = [&](std::size_t i) { return s.stack[s.stack.size() - 1 - i]; };
    EventEmission e;
    e.data_offset = at(0);
    e.data_size = at(1);
    e.at_pc = s.pc;
    if (topic_count > 0) e.topic0 = at(2);
    for (int i = 1; i < topic_count; ++i) e.topics.push_back(at(2 + static_cast<std::size_t>(i)));
    return e;
}

bool is_transfer_emission(const EventEmission& e) {
    return e.topic0 && e.topics.size() == 3 && expr::is_const(e.topic0) && e.topic0->value == transfer_topic();
}

void on_owner_return(const ExecContext& ctx, MachineState& s, std::uint32_t pc) {
    if (!ctx.binding || !ctx.unit) return;
    const auto span = ctx.span_at(pc);
    if (!span || span->file < 0) return;
    const bool inside = std::any_of(ctx.binding->sites.begin(), ctx.binding->sites.end(),
                                    [&](const ReturnSite& site) { return site.expression.contains(*span); });
    if (s.in_owner_return && !inside && !s.owner_call && !s.stack.empty()) {
        const Expr& top = s.stack.back();
        if (s.owner_trace.empty() || !expr::equal(s.owner_trace.back(), top)) s.owner_trace.push_back(top);
    }
    s.in_owner_return = inside;
    s.owner_call = inside && ctx.jump_at(pc) == JumpKind::IntoFunction;
}

std::vector<MachineState> step(const ExecContext& ctx, MachineState s, const Instruction& ins) {
    const std::uint8_t op = ins.opcode;
    const auto& info = opcode_info(op);
    if (!info.defined || is_halting(op)) return {};
    need(s, info.pops);
    ++s.steps_used;
    const std::uint32_t next = ins.next_pc();

    if (is_push(op)) {
        push(s, expr::constant(ins.push_value()));
        s.pc = next;
        return {std::move(s)};
    }
    if (op >= DUP1 && op <= DUP16) {
        const std::size_t k = op - DUP1 + 1;
        push(s, s.stack[s.stack.size() - k]);
        s.pc = next;
        return {std::move(s)};
    }
    if (op >= SWAP1 && op <= SWAP16) {
        const std::size_t k = op - SWAP1 + 1;
        std::swap(s.stack.back(), s.stack[s.stack.size() - 1 - k]);
        s.pc = next;
        return {std::move(s)};
    }
    if (is_log(op)) {
        const int n = op - LOG0;
        if (auto e = on_log(s, n)) s.emissions.push_back(std::move(*e));
        for (int i = 0; i < n + 2; ++i) pop(s);
        s.pc = next;
        return {std::move(s)};
    }
    if (const Op bop = binary_op(op); bop != Op::Const) {
        Expr a = pop(s);
        Expr b = pop(s);
        push(s, expr::make(bop, {std::move(a), std::move(b)}));
        s.pc = next;
        return {std::move(s)};
    }

    switch (op) {
        case GT: {
            Expr a = pop(s);
            Expr b = pop(s);
            push(s, expr::lt(std::move(b), std::move(a)));
            break;
        }
        case SGT: {
            Expr a = pop(s);
            Expr b = pop(s);
            push(s, expr::slt(std::move(b), std::move(a)));
            break;
        }
        case ADDMOD:
        case MULMOD: {
            Expr a = pop(s);
            Expr b = pop(s);
            Expr n = pop(s);
            push(s, expr::make(op == ADDMOD ? Op::AddMod : Op::MulMod, {std::move(a), std::move(b), std::move(n)}));
            break;
        }
        case ISZERO: push(s, expr::iszero(pop(s))); break;
        case NOT: push(s, expr::make(Op::Not, {pop(s)})); break;
        case SHA3: {
            Expr off = pop(s);
            Expr size = pop(s);
            push(s, sha3(s, off, size));
            break;
        }
        case ADDRESS: push(s, env_var(op, "address(this)", 160)); break;
        case ORIGIN: push(s, env_var(op, "tx.origin", 160)); break;
        case CALLER: push(s, env_var(op, "msg.sender", 160)); break;
        case CALLVALUE: push(s, env_var(op, "msg.value", 256)); break;
        case CALLDATASIZE: push(s, env_var(op, "calldatasize", 256)); break;
        case CODESIZE: push(s, expr::constant(U256(ctx.cfg && !ctx.cfg->instructions.empty() ? ctx.cfg->instructions.back().next_pc() : 0))); break;
        case GASPRICE: push(s, env_var(op, "tx.gasprice", 256)); break;
        case COINBASE: push(s, env_var(op, "block.coinbase", 160)); break;
        case TIMESTAMP: push(s, env_var(op, "block.timestamp", 256)); break;
        case NUMBER: push(s, env_var(op, "block.number", 256)); break;
        case DIFFICULTY: push(s, env_var(op, "block.prevrandao", 256)); break;
        case GASLIMIT: push(s, env_var(op, "block.gaslimit", 256)); break;
        case CHAINID: push(s, env_var(op, "block.chainid", 256)); break;
        case SELFBALANCE: push(s, env_var(op, "selfbalance", 256)); break;
        case BASEFEE: push(s, env_var(op, "block.basefee", 256)); break;
        case BALANCE: push(s, env_var(op, "balance", 256, pop(s))); break;
        case EXTCODESIZE: push(s, env_var(op, "extcodesize", 256, pop(s))); break;
        case EXTCODEHASH: push(s, env_var(op, "extcodehash", 256, pop(s))); break;
        case BLOCKHASH: push(s, env_var(op, "blockhash", 256, pop(s))); break;
        case GAS: push(s, fresh_var(s, "gas", 256)); break;
        case MSIZE: push(s, fresh_var(s, "msize", 256)); break;
        case RETURNDATASIZE: push(s, fresh_var(s, "returndatasize", 256)); break;
        case PC: push(s, expr::constant(U256(ins.pc))); break;
        case CALLDATALOAD: {
            Expr off = pop(s);
            push(s, on_calldataload(ctx, s, off));
            break;
        }
        case CALLDATACOPY:
        case CODECOPY:
        case RETURNDATACOPY: {
            Expr dst = pop(s);
            pop(s);
            Expr size = pop(s);
            havoc(s, std::move(dst), std::move(size));
            break;
        }
        case EXTCODECOPY: {
            pop(s);
            Expr dst = pop(s);
            pop(s);
            Expr size = pop(s);
            havoc(s, std::move(dst), std::move(size));
            break;
        }
        case MCOPY: {
            Expr dst = pop(s);
            pop(s);
            Expr size = pop(s);
            havoc(s, std::move(dst), std::move(size));
            break;
        }
        case POP: pop(s); break;
        case MLOAD: {
            Expr off = pop(s);
            push(s, mload(s, off));
            break;
        }
        case MSTORE: {
            Expr off = pop(s);
            Expr val = pop(s);
            s.memory.push_back(MemWrite{MemWriteKind::Word, std::move(off), std::move(val), nullptr, static_cast<std::uint32_t>(s.memory.size())});
            break;
        }
        case MSTORE8: {
            Expr off = pop(s);
            Expr val = expr::band(pop(s), expr::constant(U256(0xff)));
            s.memory.push_back(MemWrite{MemWriteKind::Byte, std::move(off), std::move(val), nullptr, static_cast<std::uint32_t>(s.memory.size())});
            break;
        }
        case SLOAD: {
            Expr slot = pop(s);
            Expr value;
            for (auto it = s.storage.rbegin(); it != s.storage.rend(); ++it) {
                if (expr::equal(it->slot, slot)) {
                    value = it->value;
                    break;
                }
            }
            if (!value) {
                const bool mapping = expr::contains(slot, Op::Sha3);
                value = expr::var(mapping ? VarKind::StorageMapping : VarKind::StorageDirect, 0, slot, "storage",
                                  storage_name(ctx, ins.pc, mapping, slot), 256);
            }
            push(s, std::move(value));
            break;
        }
        case SSTORE: {
            Expr slot = pop(s);
            Expr val = pop(s);
            on_sstore(s, slot, val);
            break;
        }
        case TLOAD: push(s, expr::var(VarKind::FreshExternal, 0, pop(s), "transient", "transient[...]", 256)); break;
        case TSTORE:
            pop(s);
            pop(s);
            break;
        case JUMPDEST: break;
        case JUMP:
            jump_to(ctx, s, pop(s));
            return {std::move(s)};
        case JUMPI: {
            Expr dest = pop(s);
            Expr cond = pop(s);
            if (const auto c = expr::as_const(cond)) {
                if (c->is_zero()) s.pc = next;
                else jump_to(ctx, s, dest);
                return {std::move(s)};
            }
            const SrcSpan span = ctx.span_at(ins.pc).value_or(SrcSpan{});
            const Constraint yes = from_condition(cond, true, ins.pc, span);
            const Constraint no = from_condition(cond, false, ins.pc, span);
            std::vector<MachineState> out;
            const bool yes_ok = !directly_contradicts(s.constraints, yes);
            const bool no_ok = !directly_contradicts(s.constraints, no);
            if (yes_ok) {
                MachineState t = no_ok ? s : std::move(s);
                t.constraints = t.constraints.push(yes);
                jump_to(ctx, t, dest);
                out.push_back(std::move(t));
            }
            if (no_ok) {
                s.constraints = s.constraints.push(no);
                s.pc = next;
                out.push_back(std::move(s));
            }
            return out;
        }
        case CREATE:
        case CREATE2:
        case CALL:
        case CALLCODE:
        case DELEGATECALL:
        case STATICCALL: {
            const bool create = op == CREATE || op == CREATE2;
            std::vector<Expr> args;
            for (int i = 0; i < info.pops; ++i) args.push_back(pop(s));
            if (!create) {
                const std::size_t ret = (op == CALL || op == CALLCODE) ? 5 : 4;
                havoc(s, args[ret], args[ret + 1]);
            }
            s.tainted = true;
            push(s, fresh_var(s, create ? "create" : "call", create ? 160 : 1));
            break;
        }
        default:
            // Remaining defined opcodes: pop operands, push fresh results.
            for (int i = 0; i < info.pops; ++i) pop(s);
            for (int i = 0; i < info.pushes; ++i) push(s, fresh_var(s, std::string(info.name), 256));
            break;
    }
    s.pc = next;
    return {std::move(s)};
}

namespace {

std::uint64_t loop_key(const Cfg& cfg, const MachineState& s) {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ s.pc;
    h = h * 0x100000001b3ULL ^ s.stack.size();
    for (std::size_t i = 0; i < s.stack.size(); ++i) {
        const auto& e = s.stack[i];
        if (e->op != Op::Const || !e->value.fits_u64() || e->value.low64() > 0xffffffffULL) continue;
        const auto v = static_cast<std::uint32_t>(e->value.low64());
        if (!cfg.is_jumpdest(v)) continue;
        h = (h ^ (static_cast<std::uint64_t>(i) << 32 | v)) * 0x100000001b3ULL;
    }
    return h;
}

class Explorer {
public:
    Explorer(const CompilationUnit& unit, const Cfg& cfg, const FunctionInfo& fn, const std::optional<ReturnBinding>& binding,
             const ExplorationBudget& budget, std::uint32_t entry)
        : cfg_(cfg), fn_(fn), budget_(budget), entry_(entry) {
        ctx_.cfg = &cfg;
        ctx_.unit = &unit;
        ctx_.function = &fn;
        ctx_.selector = *fn.selector;
        ctx_.binding = binding ? &*binding : nullptr;
    }

    ExplorationResult run() {
        std::vector<MachineState> work;
        work.push_back(initial_state(ctx_));
        while (!work.empty()) {
            MachineState st = std::move(work.back());
            work.pop_back();
            if (result_.timed_out) {
                finish(std::move(st), EndKind::BudgetExhausted, Diagnostic::Timeout);
                continue;
            }
            run_path(std::move(st), work);
        }
        settle_exit_marks();
        return std::move(result_);
    }

private:
    void run_path(MachineState st, std::vector<MachineState>& work) {
        for (;;) {
            if ((result_.steps & 255) == 0 && std::chrono::steady_clock::now() > budget_.deadline) result_.timed_out = true;
            if (result_.timed_out) return finish(std::move(st), EndKind::BudgetExhausted, Diagnostic::Timeout);
            if (result_.steps >= budget_.max_steps) return finish(std::move(st), EndKind::BudgetExhausted, Diagnostic::StepBudget);
            if (result_.paths >= budget_.max_paths) return finish(std::move(st), EndKind::BudgetExhausted, Diagnostic::PathBudget);

            const auto idx = cfg_.instruction_at(st.pc);
            if (!idx) {
                // Running off the end is an implicit STOP; landing inside an immediate cannot happen via JUMP.
                return finish(std::move(st), EndKind::NormalExit, std::nullopt);
            }
            const Instruction& ins = cfg_.instructions[*idx];
            if (st.pc == entry_) st.reached_entry = true;
            if (ins.opcode == opcodes::JUMPDEST) {
                if (++st.visits[loop_key(cfg_, st)] > budget_.loop_bound) {
                    return finish(std::move(st), EndKind::BudgetExhausted, Diagnostic::LoopBound);
                }
            }
            on_owner_return(ctx_, st, st.pc);
            if (ins.opcode == opcodes::LOG4 && st.reached_entry) {
                if (auto em = on_log(st, 4); em && is_transfer_emission(*em)) emission_record(st, *em);
            }
            const auto& info = opcode_info(ins.opcode);
            if (!info.defined || is_halting(ins.opcode)) {
                const bool ok = ins.opcode == opcodes::STOP || ins.opcode == opcodes::RETURN || ins.opcode == opcodes::SELFDESTRUCT;
                return finish(std::move(st), ok ? EndKind::NormalExit : EndKind::Revert, std::nullopt);
            }
            if (const auto bad = precheck(st, ins)) return finish(std::move(st), EndKind::BudgetExhausted, bad);
            std::vector<MachineState> next;
            try {
                next = step(ctx_, std::move(st), ins);
            } catch (const PathError& e) {
                ++result_.paths;
                ++result_.diagnostics[e.diagnostic()];
                return;
            }
            ++result_.steps;
            if (next.empty()) return;  // both branches contradicted
            for (std::size_t i = next.size(); i-- > 1;) work.push_back(std::move(next[i]));
            st = std::move(next[0]);
        }
    }

    // The path-killing conditions of step(), checked while the state is still ours.
    std::optional<Diagnostic> precheck(const MachineState& st, const Instruction& ins) const {
        const auto& info = opcode_info(ins.opcode);
        if (st.stack.size() < info.pops) return Diagnostic::StackUnderflow;
        if (st.stack.size() - info.pops + info.pushes > 1024) return Diagnostic::StackOverflow;
        if (ins.opcode == opcodes::JUMP || ins.opcode == opcodes::JUMPI) {
            if (ins.opcode == opcodes::JUMPI) {
                const auto c = expr::as_const(st.stack[st.stack.size() - 2]);
                if (c && c->is_zero()) return std::nullopt;
            }
            const auto d = expr::as_const(st.stack.back());
            if (!d) return Diagnostic::UnknownJumpTarget;
            if (!d->fits_u64() || d->low64() > 0xffffffffULL || !cfg_.is_jumpdest(static_cast<std::uint32_t>(d->low64()))) {
                return Diagnostic::InvalidJumpTarget;
            }
        }
        return std::nullopt;
    }

    void emission_record(MachineState& st, const EventEmission& em) {
        PathRecord r = base_record(st, EndKind::TransferEmission);
        r.from_param = from_of(em);
        r.to_param = em.topics[1];
        r.token_param = em.topics[2];
        r.sstore_mark_at_emission = st.sstore_mark;
        r.sstore_mark_at_exit = st.sstore_mark;
        st.pending_emissions.push_back(r.id);
        result_.records.push_back(std::move(r));
    }

    Expr from_of(const EventEmission& em) const {
        if (!fn_.params.empty() && fn_.params[0].second == "address") return parameter_var(&fn_, 0);
        return em.topics[0];
    }

    PathRecord base_record(const MachineState& st, EndKind kind) {
        PathRecord r;
        r.id = result_.records.size();
        r.path_id = result_.paths;
        r.function = fn_;
        r.end_kind = kind;
        r.constraints = st.constraints;
        r.owner_trace = st.owner_trace;
        r.pc = st.pc;
        r.tainted = st.tainted;
        r.sstore_mark_at_emission = st.sstore_mark;
        r.sstore_mark_at_exit = st.sstore_mark;
        return r;
    }

    void finish(MachineState st, EndKind kind, std::optional<Diagnostic> diag) {
        if (diag) ++result_.diagnostics[*diag];
        if (!st.reached_entry) {
            ++result_.paths;
            ++result_.dispatch_misses;
            return;
        }
        PathRecord r = base_record(st, kind);
        r.diagnostic = diag;
        for (auto it = st.emissions.rbegin(); it != st.emissions.rend(); ++it) {
            if (is_transfer_emission(*it)) {
                r.from_param = from_of(*it);
                r.to_param = it->topics[1];
                r.token_param = it->topics[2];
                break;
            }
        }
        if (kind == EndKind::NormalExit) r.continues = st.pending_emissions;
        result_.records.push_back(std::move(r));
        ++result_.paths;
    }

    // An emission counts as store-free at exit when some normal exit reached
    // from it performed no SSTORE at all.
    void settle_exit_marks() {
        std::vector<int> exits(result_.records.size(), 0);
        std::vector<char> clean_exit(result_.records.size(), 0);
        for (const auto& r : result_.records) {
            if (r.end_kind != EndKind::NormalExit) continue;
            for (std::size_t id : r.continues) {
                ++exits[id];
                if (!r.sstore_mark_at_exit) clean_exit[id] = 1;
            }
        }
        for (auto& r : result_.records) {
            if (r.end_kind != EndKind::TransferEmission) continue;
            r.sstore_mark_at_exit = exits[r.id] == 0 ? true : !clean_exit[r.id];
        }
    }

    const Cfg& cfg_;
    const FunctionInfo& fn_;
    ExplorationBudget budget_;
    std::uint32_t entry_;
    ExecContext ctx_;
    ExplorationResult result_;
};

}  // namespace

ExplorationResult explore_function(const CompilationUnit& unit, const Cfg& cfg, const FunctionInfo& fn,
                                   const std::optional<ReturnBinding>& binding, const ExplorationBudget& budget) {
    if (!fn.selector) throw Error(ErrorCode::EntryNotFound, "function " + fn.name + " has no selector");
    const auto entry = find_function_entry(cfg, *fn.selector);
    if (!entry) throw Error(ErrorCode::EntryNotFound, "no dispatcher entry for " + fn.signature());
    if (budget.loop_bound <= 0 || budget.max_steps == 0 || budget.max_paths == 0) {
        throw Error(ErrorCode::InvalidConfig, "exploration budget limits must be positive");
    }
    return Explorer(unit, cfg, fn, binding, budget, *entry).run();
}

}  // namespace sleepscan
