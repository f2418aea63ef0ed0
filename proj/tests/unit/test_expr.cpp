#include <doctest.h>

#include "sleepscan/expr.hpp"
#include "sleepscan/keccak.hpp"

using namespace sleepscan;

namespace {

Expr param(int i, unsigned bits = 256) { return expr::var(VarKind::Parameter, i, nullptr, "calldata", "p" + std::to_string(i), bits); }
Expr c(std::uint64_t v) { return expr::constant(U256(v)); }

}  // namespace

TEST_CASE("constants fold") {
    CHECK(expr::as_const(expr::add(c(2), c(3))) == U256(5));
    CHECK(expr::as_const(expr::sub(c(2), c(3))) == U256::max());
    CHECK(expr::as_const(expr::make(Op::Div, {c(7), c(0)})) == U256(0));
    CHECK(expr::as_const(expr::iszero(c(0))) == U256(1));
    CHECK(expr::as_const(expr::slt(c(0), expr::constant(U256::max()))) == U256(0));
}

TEST_CASE("simplifier identities") {
    const auto x = param(0);
    CHECK(expr::equal(expr::add(x, c(0)), x));
    CHECK(expr::equal(expr::add(c(0), x), x));
    CHECK(expr::as_const(expr::sub(x, x)) == U256(0));
    CHECK(expr::as_const(expr::sub(expr::add(x, c(4)), x)) == U256(4));
    CHECK(expr::equal(expr::add(expr::add(x, c(1)), c(2)), expr::add(x, c(3))));
    CHECK(expr::equal(expr::sub(x, c(1)), expr::add(x, expr::constant(U256::max()))));
    CHECK(expr::equal(expr::make(Op::Mul, {x, c(1)}), x));
    CHECK(expr::as_const(expr::make(Op::Mul, {x, c(0)})) == U256(0));
    CHECK(expr::equal(expr::make(Op::Div, {x, c(1)}), x));
    CHECK(expr::equal(expr::make(Op::Div, {x, c(256)}), expr::make(Op::Shr, {c(8), x})));
    CHECK(expr::as_const(expr::eq(x, x)) == U256(1));
    CHECK(expr::as_const(expr::lt(x, x)) == U256(0));
    CHECK(expr::as_const(expr::lt(x, c(0))) == U256(0));
    CHECK(expr::equal(expr::band(x, expr::constant(U256::max())), x));
}

TEST_CASE("commutative operands are ordered") {
    const auto x = param(0);
    const auto y = param(1);
    CHECK(expr::equal(expr::eq(x, y), expr::eq(y, x)));
    CHECK(expr::equal(expr::add(c(9), x), expr::add(x, c(9))));
    CHECK(expr::equal(expr::band(x, y), expr::band(y, x)));
}

TEST_CASE("address masks") {
    const auto mask = expr::constant(U256::low_mask(160));
    const auto addr = param(0, 160);
    const auto wide = param(1);
    CHECK(expr::equal(expr::band(addr, mask), addr));
    const auto masked = expr::band(wide, mask);
    CHECK(masked->op == Op::And);
    CHECK(masked->bits == 160);
    CHECK(expr::equal(expr::strip_address_mask(masked), wide));
    CHECK(expr::equal(expr::band(masked, mask), masked));
    const auto byte = expr::band(wide, c(0xff));
    CHECK(expr::equal(expr::strip_address_mask(byte), byte));
}

TEST_CASE("boolean double negation") {
    const auto x = param(0);
    const auto b = expr::eq(x, c(3));
    CHECK(expr::equal(expr::iszero(expr::iszero(b)), b));
    const auto w = expr::iszero(expr::iszero(x));
    CHECK(w->op == Op::IsZero);
}

TEST_CASE("var identity ignores display name") {
    const auto a = expr::var(VarKind::Parameter, 0, nullptr, "calldata", "from", 160);
    const auto b = expr::var(VarKind::Parameter, 0, nullptr, "calldata", "_from", 160);
    const auto d = expr::var(VarKind::Parameter, 1, nullptr, "calldata", "from", 160);
    CHECK(expr::equal(a, b));
    CHECK_FALSE(expr::equal(a, d));
    const auto s1 = expr::var(VarKind::StorageDirect, 0, c(1), "storage", "owner", 256);
    const auto s2 = expr::var(VarKind::StorageDirect, 0, c(2), "storage", "owner", 256);
    CHECK_FALSE(expr::equal(s1, s2));
}

TEST_CASE("sha3 folds over big endian words") {
    const auto h = expr::make(Op::Sha3, {c(1), c(2)});
    REQUIRE(expr::is_const(h));
    std::vector<std::uint8_t> buf(64, 0);
    buf[31] = 1;
    buf[63] = 2;
    CHECK(h->value == U256::from_be_bytes(keccak256(buf)));
    const auto sym = expr::make(Op::Sha3, {param(0), c(2)});
    CHECK(sym->op == Op::Sha3);
    CHECK(expr::contains(expr::add(sym, c(1)), Op::Sha3));
    CHECK(expr::mentions(sym, VarKind::Parameter));
    CHECK_FALSE(expr::mentions(sym, VarKind::Environment));
}

TEST_CASE("to_string renders and truncates") {
    const auto s = expr::to_string(expr::eq(param(0), c(5)));
    CHECK(s.find("p0") != std::string::npos);
    CHECK(s.find("==") != std::string::npos);
    auto big = param(0);
    for (int i = 0; i < 100; ++i) big = expr::make(Op::Xor, {big, param(i + 1)});
    CHECK(expr::to_string(big, 50).size() <= 53);
    CHECK(expr::size(big) == 201);
}
