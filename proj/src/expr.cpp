#include "sleepscan/expr.hpp"

#include <algorithm>
#include <functional>

#include "sleepscan/keccak.hpp"

namespace sleepscan {

std::string_view op_name(Op op) {
    switch (op) {
        case Op::Const: return "const";
        case Op::Var: return "var";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::Div: return "div";
        case Op::SDiv: return "sdiv";
        case Op::Mod: return "mod";
        case Op::SMod: return "smod";
        case Op::AddMod: return "addmod";
        case Op::MulMod: return "mulmod";
        case Op::Exp: return "exp";
        case Op::SignExtend: return "signextend";
        case Op::Lt: return "lt";
        case Op::Slt: return "slt";
        case Op::Eq: return "eq";
        case Op::IsZero: return "iszero";
        case Op::And: return "and";
        case Op::Or: return "or";
        case Op::Xor: return "xor";
        case Op::Not: return "not";
        case Op::Byte: return "byte";
        case Op::Shl: return "shl";
        case Op::Shr: return "shr";
        case Op::Sar: return "sar";
        case Op::Sha3: return "sha3";
    }
    return "?";
}

std::string_view to_string(VarKind k) {
    switch (k) {
        case VarKind::Parameter: return "parameter";
        case VarKind::StorageDirect: return "storage-direct";
        case VarKind::StorageMapping: return "storage-mapping";
        case VarKind::Environment: return "environment";
        case VarKind::FreshExternal: return "fresh-external";
    }
    return "?";
}

namespace expr {

namespace {

std::size_t mix(std::size_t h, std::size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

bool commutative(Op op) {
    return op == Op::Add || op == Op::Mul || op == Op::And || op == Op::Or || op == Op::Xor || op == Op::Eq;
}

unsigned clamp_bits(unsigned b) { return b > 256 ? 256 : b; }

unsigned estimate_bits(Op op, const std::vector<Expr>& a) {
    auto b = [&](std::size_t i) -> unsigned { return a[i]->bits; };
    switch (op) {
        case Op::Lt:
        case Op::Slt:
        case Op::Eq:
        case Op::IsZero: return 1;
        case Op::And: return std::min(b(0), b(1));
        case Op::Or:
        case Op::Xor: return std::max(b(0), b(1));
        case Op::Add: return clamp_bits(std::max(b(0), b(1)) + 1);
        case Op::Mul: return clamp_bits(b(0) + b(1));
        case Op::Div: return b(0);
        case Op::Mod: return std::min(b(0), b(1));
        case Op::Byte: return 8;
        case Op::Shr:
            if (auto k = expr::as_const(a[0]); k && k->fits_u64()) return k->low64() >= b(1) ? 0 : b(1) - static_cast<unsigned>(k->low64());
            return b(1);
        case Op::Shl:
            if (auto k = expr::as_const(a[0]); k && k->fits_u64() && k->low64() < 256) return clamp_bits(b(1) + static_cast<unsigned>(k->low64()));
            return 256;
        default: return 256;
    }
}

Expr build(Op op, std::vector<Expr> args) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->bits = static_cast<std::uint16_t>(estimate_bits(op, args));
    std::size_t h = std::hash<int>{}(static_cast<int>(op) + 1000);
    for (const auto& a : args) h = mix(h, a->hash);
    n->hash = h;
    n->args = std::move(args);
    return n;
}

bool is_low_mask(const U256& v, unsigned& width) {
    const unsigned bl = v.bit_length();
    if (v != U256::low_mask(bl)) return false;
    width = bl;
    return true;
}

}  // namespace

Expr constant(const U256& v) {
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->value = v;
    n->bits = static_cast<std::uint16_t>(v.bit_length());
    n->hash = mix(0x51ed270b27af1c3dULL, v.hash());
    return n;
}

Expr var(VarKind kind, std::int64_t index, Expr key, std::string origin, std::string name, unsigned bits) {
    auto info = std::make_shared<VarInfo>();
    info->kind = kind;
    info->index = index;
    info->key = std::move(key);
    info->origin = std::move(origin);
    info->name = std::move(name);
    auto n = std::make_shared<Node>();
    n->op = Op::Var;
    n->bits = static_cast<std::uint16_t>(clamp_bits(bits));
    std::size_t h = mix(0x2545f4914f6cdd1dULL, static_cast<std::size_t>(kind));
    h = mix(h, std::hash<std::int64_t>{}(index));
    h = mix(h, std::hash<std::string>{}(info->origin));
    if (info->key) h = mix(h, info->key->hash);
    n->hash = h;
    n->var = std::move(info);
    return n;
}

std::optional<U256> as_const(const Expr& e) {
    if (e->op == Op::Const) return e->value;
    return std::nullopt;
}

U256 fold(Op op, const std::vector<U256>& a) {
    namespace ea = evm_arith;
    switch (op) {
        case Op::Add: return a[0] + a[1];
        case Op::Sub: return a[0] - a[1];
        case Op::Mul: return a[0] * a[1];
        case Op::Div: return ea::div(a[0], a[1]);
        case Op::SDiv: return ea::sdiv(a[0], a[1]);
        case Op::Mod: return ea::mod(a[0], a[1]);
        case Op::SMod: return ea::smod(a[0], a[1]);
        case Op::AddMod: return ea::addmod(a[0], a[1], a[2]);
        case Op::MulMod: return ea::mulmod(a[0], a[1], a[2]);
        case Op::Exp: return ea::exp(a[0], a[1]);
        case Op::SignExtend: return ea::signextend(a[0], a[1]);
        case Op::Lt: return U256(a[0] < a[1] ? 1 : 0);
        case Op::Slt: return U256(ea::slt(a[0], a[1]) ? 1 : 0);
        case Op::Eq: return U256(a[0] == a[1] ? 1 : 0);
        case Op::IsZero: return U256(a[0].is_zero() ? 1 : 0);
        case Op::And: return a[0] & a[1];
        case Op::Or: return a[0] | a[1];
        case Op::Xor: return a[0] ^ a[1];
        case Op::Not: return ~a[0];
        case Op::Byte: return ea::byte(a[0], a[1]);
        case Op::Shl: return ea::shl(a[0], a[1]);
        case Op::Shr: return ea::shr(a[0], a[1]);
        case Op::Sar: return ea::sar(a[0], a[1]);
        case Op::Sha3: {
            std::vector<std::uint8_t> bytes;
            bytes.reserve(a.size() * 32);
            for (const auto& w : a) {
                const auto be = w.to_be_bytes();
                bytes.insert(bytes.end(), be.begin(), be.end());
            }
            return keccak256_word(bytes);
        }
        case Op::Const:
        case Op::Var: break;
    }
    return U256();
}

Expr make(Op op, std::vector<Expr> args) {
    if (commutative(op)) {
        // Constants last, otherwise by hash.
        std::sort(args.begin(), args.end(), [](const Expr& x, const Expr& y) {
            const bool cx = x->op == Op::Const;
            const bool cy = y->op == Op::Const;
            if (cx != cy) return cy;
            return x->hash < y->hash;
        });
    }
    if (std::all_of(args.begin(), args.end(), [](const Expr& e) { return e->op == Op::Const; })) {
        std::vector<U256> vals;
        vals.reserve(args.size());
        for (const auto& e : args) vals.push_back(e->value);
        return constant(fold(op, vals));
    }
    const auto c0 = args.empty() ? std::optional<U256>{} : expr::as_const(args[0]);
    const auto c1 = args.size() < 2 ? std::optional<U256>{} : expr::as_const(args[1]);
    const U256 zero;
    switch (op) {
        case Op::Add:
            if (c1 && c1->is_zero()) return args[0];
            if (c1 && args[0]->op == Op::Add && is_const(args[0]->args[1])) {
                return make(Op::Add, {args[0]->args[0], constant(args[0]->args[1]->value + *c1)});
            }
            break;
        case Op::Sub:
            if (c1) return make(Op::Add, {args[0], constant(zero - *c1)});
            if (equal(args[0], args[1])) return constant(zero);
            if (args[0]->op == Op::Add && is_const(args[0]->args[1]) && equal(args[0]->args[0], args[1])) return args[0]->args[1];
            break;
        case Op::Mul:
            if (c1 && c1->is_zero()) return constant(zero);
            if (c1 && *c1 == U256(1)) return args[0];
            break;
        case Op::Div:
            if (c1 && *c1 == U256(1)) return args[0];
            if (c1 && c1->is_zero()) return constant(zero);
            if (c0 && c0->is_zero()) return constant(zero);
            if (c1) {
                unsigned w = 0;
                const U256 below = *c1 - U256(1);
                if ((*c1 & below).is_zero() && is_low_mask(below, w)) return make(Op::Shr, {constant(U256(w)), args[0]});
            }
            break;
        case Op::Mod:
            if (c1 && (c1->is_zero() || *c1 == U256(1))) return constant(zero);
            break;
        case Op::Exp:
            if (c1 && c1->is_zero()) return constant(U256(1));
            if (c1 && *c1 == U256(1)) return args[0];
            break;
        case Op::And: {
            if (c1 && c1->is_zero()) return constant(zero);
            if (c1 && *c1 == U256::max()) return args[0];
            unsigned w = 0;
            if (c1 && is_low_mask(*c1, w)) {
                if (args[0]->bits <= w) return args[0];
                if (args[0]->op == Op::And && is_const(args[0]->args[1])) {
                    return make(Op::And, {args[0]->args[0], constant(args[0]->args[1]->value & *c1)});
                }
            }
            if (equal(args[0], args[1])) return args[0];
            break;
        }
        case Op::Or:
            if (c1 && c1->is_zero()) return args[0];
            if (equal(args[0], args[1])) return args[0];
            break;
        case Op::Xor:
            if (c1 && c1->is_zero()) return args[0];
            if (equal(args[0], args[1])) return constant(zero);
            break;
        case Op::Not:
            if (args[0]->op == Op::Not) return args[0]->args[0];
            break;
        case Op::Eq:
            if (equal(args[0], args[1])) return constant(U256(1));
            break;
        case Op::Lt:
        case Op::Slt:
            if (equal(args[0], args[1])) return constant(zero);
            if (op == Op::Lt && c1 && c1->is_zero()) return constant(zero);
            break;
        case Op::IsZero:
            if (args[0]->op == Op::IsZero && args[0]->args[0]->bits <= 1) return args[0]->args[0];
            break;
        case Op::Shl:
        case Op::Shr:
        case Op::Sar:
            if (c0 && c0->is_zero()) return args[1];
            if (op == Op::Shr && c0 && c0->fits_u64() && c0->low64() >= args[1]->bits) return constant(zero);
            break;
        case Op::SignExtend:
            if (c0 && c0->fits_u64() && c0->low64() < 31 && args[1]->bits <= c0->low64() * 8 + 7) return args[1];
            break;
        default: break;
    }
    return build(op, std::move(args));
}

bool equal(const Expr& a, const Expr& b) {
    if (a == b) return true;
    if (a->hash != b->hash || a->op != b->op) return false;
    switch (a->op) {
        case Op::Const: return a->value == b->value;
        case Op::Var: {
            const VarInfo& x = *a->var;
            const VarInfo& y = *b->var;
            if (x.kind != y.kind || x.index != y.index || x.origin != y.origin) return false;
            if (!x.key || !y.key) return !x.key && !y.key;
            return equal(x.key, y.key);
        }
        default:
            if (a->args.size() != b->args.size()) return false;
            for (std::size_t i = 0; i < a->args.size(); ++i) {
                if (!equal(a->args[i], b->args[i])) return false;
            }
            return true;
    }
}

bool contains(const Expr& e, Op op) {
    if (e->op == op) return true;
    if (e->op == Op::Var && e->var->key) return contains(e->var->key, op);
    return std::any_of(e->args.begin(), e->args.end(), [op](const Expr& a) { return contains(a, op); });
}

bool mentions(const Expr& e, VarKind kind) {
    if (e->op == Op::Var) return e->var->kind == kind;
    return std::any_of(e->args.begin(), e->args.end(), [kind](const Expr& a) { return mentions(a, kind); });
}

Expr strip_address_mask(const Expr& e) {
    Expr cur = e;
    while (cur->op == Op::And && is_const(cur->args[1])) {
        unsigned w = 0;
        if (!is_low_mask(cur->args[1]->value, w) || w < 160) break;
        cur = cur->args[0];
    }
    return cur;
}

std::size_t size(const Expr& e) {
    std::size_t n = 1;
    for (const auto& a : e->args) n += size(a);
    return n;
}

namespace {

void render(const Expr& e, std::string& out, std::size_t max_len) {
    if (out.size() > max_len) return;
    switch (e->op) {
        case Op::Const:
            out += e->value.bit_length() <= 16 ? std::to_string(e->value.low64()) : e->value.to_hex();
            return;
        case Op::Var: out += e->var->name; return;
        default: break;
    }
    const char* infix = nullptr;
    switch (e->op) {
        case Op::Add: infix = " + "; break;
        case Op::Sub: infix = " - "; break;
        case Op::Mul: infix = " * "; break;
        case Op::Eq: infix = " == "; break;
        case Op::Lt: infix = " < "; break;
        case Op::And: infix = " & "; break;
        case Op::Or: infix = " | "; break;
        default: break;
    }
    if (infix && e->args.size() == 2) {
        out += '(';
        render(e->args[0], out, max_len);
        out += infix;
        render(e->args[1], out, max_len);
        out += ')';
        return;
    }
    out += op_name(e->op);
    out += '(';
    for (std::size_t i = 0; i < e->args.size(); ++i) {
        if (i) out += ", ";
        render(e->args[i], out, max_len);
    }
    out += ')';
}

}  // namespace

std::string to_string(const Expr& e, std::size_t max_len) {
    std::string out;
    render(e, out, max_len);
    if (out.size() > max_len) {
        out.resize(max_len);
        out += "...";
    }
    return out;
}

}  // namespace expr
}  // namespace sleepscan
