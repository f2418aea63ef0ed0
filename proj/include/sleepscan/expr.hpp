#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sleepscan/u256.hpp"

namespace sleepscan {

enum class Op : std::uint8_t {
    Const,
    Var,
    Add,
    Sub,
    Mul,
    Div,
    SDiv,
    Mod,
    SMod,
    AddMod,
    MulMod,
    Exp,
    SignExtend,
    Lt,
    Slt,
    Eq,
    IsZero,
    And,
    Or,
    Xor,
    Not,
    Byte,
    Shl,
    Shr,
    Sar,
    Sha3,
};

std::string_view op_name(Op op);

enum class VarKind : std::uint8_t { Parameter, StorageDirect, StorageMapping, Environment, FreshExternal };

std::string_view to_string(VarKind k);

struct Node;
using Expr = std::shared_ptr<const Node>;

/// Identity of a Var is (kind, index, origin, key); `name` is display only.
struct VarInfo {
    VarKind kind = VarKind::FreshExternal;
    /// Parameter position, environment opcode, or fresh-value counter.
    std::int64_t index = 0;
    /// Storage slot or calldata offset expression; null otherwise.
    Expr key;
    std::string origin;
    std::string name;
};

struct Node {
    Op op = Op::Const;
    /// Upper bound on the value's bit length.
    std::uint16_t bits = 256;
    std::size_t hash = 0;
    U256 value;
    std::shared_ptr<const VarInfo> var;
    std::vector<Expr> args;
};

namespace expr {

Expr constant(const U256& v);
Expr var(VarKind kind, std::int64_t index, Expr key, std::string origin, std::string name, unsigned bits = 256);

/// Builds an operator node, folding constants and applying local identities.
/// Sha3 takes the hashed 32-byte words in memory order.
Expr make(Op op, std::vector<Expr> args);

inline Expr add(Expr a, Expr b) { return make(Op::Add, {std::move(a), std::move(b)}); }
inline Expr sub(Expr a, Expr b) { return make(Op::Sub, {std::move(a), std::move(b)}); }
inline Expr band(Expr a, Expr b) { return make(Op::And, {std::move(a), std::move(b)}); }
inline Expr eq(Expr a, Expr b) { return make(Op::Eq, {std::move(a), std::move(b)}); }
inline Expr lt(Expr a, Expr b) { return make(Op::Lt, {std::move(a), std::move(b)}); }
inline Expr gt(Expr a, Expr b) { return make(Op::Lt, {std::move(b), std::move(a)}); }
inline Expr slt(Expr a, Expr b) { return make(Op::Slt, {std::move(a), std::move(b)}); }
inline Expr sgt(Expr a, Expr b) { return make(Op::Slt, {std::move(b), std::move(a)}); }
inline Expr iszero(Expr a) { return make(Op::IsZero, {std::move(a)}); }

/// Concrete semantics of an operator (Sha3 hashes the big-endian words).
U256 fold(Op op, const std::vector<U256>& args);

bool equal(const Expr& a, const Expr& b);
std::optional<U256> as_const(const Expr& e);
inline bool is_const(const Expr& e) { return e->op == Op::Const; }
bool contains(const Expr& e, Op op);
/// True when some Var of the given kind occurs in e.
bool mentions(const Expr& e, VarKind kind);
/// Strips `and(x, 2^160-1)` style masks of width >= 160.
Expr strip_address_mask(const Expr& e);
std::size_t size(const Expr& e);

std::string to_string(const Expr& e, std::size_t max_len = 240);

}  // namespace expr

struct ExprHash {
    std::size_t operator()(const Expr& e) const { return e->hash; }
};
struct ExprEq {
    bool operator()(const Expr& a, const Expr& b) const { return expr::equal(a, b); }
};

}  // namespace sleepscan
