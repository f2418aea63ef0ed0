#include <doctest.h>

#include <random>

#include "sleepscan/constraints.hpp"
#include "sleepscan/error.hpp"

using namespace sleepscan;

namespace {

Expr param(int i, unsigned bits = 256) { return expr::var(VarKind::Parameter, i, nullptr, "calldata", "p" + std::to_string(i), bits); }
Expr c(std::uint64_t v) { return expr::constant(U256(v)); }
Expr caller() { return expr::var(VarKind::Environment, 0x33, nullptr, "env", "msg.sender", 160); }
Expr direct(std::uint64_t slot, const std::string& name) {
    return expr::band(expr::var(VarKind::StorageDirect, 0, c(slot), "storage", name, 256), expr::constant(U256::low_mask(160)));
}
Expr mapping(const Expr& key, std::uint64_t slot, const std::string& name) {
    return expr::var(VarKind::StorageMapping, 0, expr::make(Op::Sha3, {key, c(slot)}), "storage", name, 256);
}

ConstraintSet of(std::initializer_list<Constraint> cs) {
    ConstraintSet s;
    for (const auto& x : cs) s = s.push(x);
    return s;
}

bool is_caller(const Expr& e) { return e->op == Op::Var && e->var->kind == VarKind::Environment && e->var->index == 0x33; }
bool is_direct(const Expr& e) { return e->op == Op::Var && e->var->kind == VarKind::StorageDirect; }

ConstraintPattern caller_eq_direct() { return ConstraintPattern{Relation::Eq, is_caller, is_direct}; }

}  // namespace

TEST_CASE("push keeps order and snapshots") {
    const auto x = param(0);
    const ConstraintSet empty;
    const auto one = empty.push(make_constraint(Relation::Eq, x, c(5)));
    const auto two = one.push(make_constraint(Relation::Neq, x, c(6)));
    CHECK(empty.empty());
    CHECK(one.size() == 1);
    REQUIRE(two.size() == 2);
    CHECK(two.items()[0].rel == Relation::Eq);
    CHECK(two.items()[1].rel == Relation::Neq);
    CHECK(one.items().size() == 1);
}

TEST_CASE("solve examples") {
    const auto x = param(0);
    const auto y = param(1);
    CHECK(solve(of({make_constraint(Relation::Eq, x, c(5)), make_constraint(Relation::Neq, x, c(5))})) == SolveResult::Unsat);
    CHECK(solve(of({make_constraint(Relation::Eq, x, c(5)), make_constraint(Relation::Neq, y, c(5))})) == SolveResult::Sat);
    const auto owner = mapping(param(2), 2, "_owners[...]");
    const auto from = param(0, 160);
    CHECK(solve(of({make_constraint(Relation::Neq, owner, from)})) == SolveResult::Sat);
    CHECK(solve(ConstraintSet{}) == SolveResult::Sat);
}

TEST_CASE("solve decides ground and ordered literals") {
    const auto x = param(0);
    CHECK(solve(of({make_constraint(Relation::Ult, c(3), c(2))})) == SolveResult::Unsat);
    CHECK(solve(of({make_constraint(Relation::Ult, x, c(0))})) == SolveResult::Unsat);
    CHECK(solve(of({make_constraint(Relation::Ult, x, c(10)), make_constraint(Relation::Ugt, x, c(7))})) == SolveResult::Sat);
    CHECK(solve(of({make_constraint(Relation::Eq, x, c(1)), make_constraint(Relation::Eq, x, c(2))})) == SolveResult::Unsat);
    CHECK(solve(of({make_constraint(Relation::Slt, x, c(0))})) == SolveResult::Sat);
    CHECK(solve(of({make_constraint(Relation::Nonzero, expr::eq(x, c(4))), make_constraint(Relation::Zero, expr::eq(x, c(4)))})) ==
          SolveResult::Unsat);
}

TEST_CASE("solve honours variable width") {
    const auto a = param(0, 160);
    CHECK(solve(of({make_constraint(Relation::Ugt, a, expr::constant(U256::low_mask(160)))})) != SolveResult::Sat);
    const auto b = param(1, 1);
    CHECK(solve(of({make_constraint(Relation::Eq, b, c(1))})) == SolveResult::Sat);
}

TEST_CASE("sha3 terms are injective") {
    const auto k1 = param(0);
    const auto k2 = param(1);
    const auto h1 = expr::make(Op::Sha3, {k1, c(3)});
    const auto h2 = expr::make(Op::Sha3, {k2, c(3)});
    // Equal hashes need equal keys, and the keys are forced apart.
    auto r = solve(of({make_constraint(Relation::Eq, h1, h2), make_constraint(Relation::Neq, k1, k2)}));
    CHECK(r != SolveResult::Sat);
    CHECK(solve(of({make_constraint(Relation::Neq, h1, h2)})) == SolveResult::Sat);
}

TEST_CASE("storage reads at the same slot agree") {
    const auto k = param(0);
    const auto v1 = mapping(k, 2, "_owners[...]");
    const auto v2 = mapping(k, 2, "owners[...]");
    CHECK(solve(of({make_constraint(Relation::Neq, v1, v2)})) != SolveResult::Sat);
}

TEST_CASE("owner equals from makes owner not from unsat") {
    const auto owner = mapping(param(2), 2, "_owners[...]");
    const auto from = param(0, 160);
    const auto masked = expr::band(owner, expr::constant(U256::low_mask(160)));
    const auto base = of({make_constraint(Relation::Eq, masked, from)});
    CHECK(solve(base) == SolveResult::Sat);
    CHECK(solve(base.push(make_constraint(Relation::Neq, masked, from))) == SolveResult::Unsat);
}

TEST_CASE("from_condition normalisation") {
    const auto x = param(0);
    const auto y = param(1);
    auto k = from_condition(expr::iszero(expr::eq(x, y)), true);
    CHECK(k.rel == Relation::Neq);
    k = from_condition(expr::iszero(expr::iszero(expr::lt(x, y))), true);
    CHECK(k.rel == Relation::Ult);
    k = from_condition(expr::lt(x, y), false);
    CHECK(k.rel == Relation::Uge);
    k = from_condition(expr::sub(x, y), true);
    CHECK(k.rel == Relation::Neq);
    k = from_condition(expr::add(x, c(5)), false);
    CHECK(k.rel == Relation::Eq);
    CHECK(k.rhs->value == U256() - U256(5));
    k = from_condition(x, true);
    CHECK(k.rel == Relation::Nonzero);
    CHECK(expr::equal(k.rhs, c(0)));
    k = from_condition(expr::slt(x, y), false);
    CHECK(k.rel == Relation::Zero);
}

TEST_CASE("negate is exact") {
    const auto x = param(0);
    const auto y = param(1);
    std::mt19937_64 rng(11);
    for (Relation r : {Relation::Eq, Relation::Neq, Relation::Ult, Relation::Ugt, Relation::Ule, Relation::Uge, Relation::Slt,
                       Relation::Sgt, Relation::Nonzero, Relation::Zero}) {
        const auto k = make_constraint(r, x, y);
        const auto n = negate(k);
        for (int i = 0; i < 50; ++i) {
            const U256 a(rng(), rng(), rng() % 3 == 0 ? ~0ULL : 0, rng() % 2 ? ~0ULL : 0);
            const U256 b = i % 5 == 0 ? a : U256(rng(), 0, 0, rng() % 2 ? ~0ULL : 0);
            const bool pos = holds(r, a, b);
            bool neg = false;
            if (n.rel == Relation::Zero && n.lhs->op == Op::Slt) {
                const bool lhs_first = expr::equal(n.lhs->args[0], x);
                neg = !(lhs_first ? evm_arith::slt(a, b) : evm_arith::slt(b, a));
            } else {
                neg = holds(n.rel, a, b);
            }
            CHECK(pos != neg);
        }
    }
}

TEST_CASE("contradiction law on random sets") {
    std::mt19937_64 rng(0xc0ffee);
    const Relation rels[] = {Relation::Eq, Relation::Neq, Relation::Ult, Relation::Ugt, Relation::Ule,
                             Relation::Uge, Relation::Slt, Relation::Sgt, Relation::Nonzero, Relation::Zero};
    std::vector<Expr> atoms;
    for (int i = 0; i < 5; ++i) atoms.push_back(param(i, i % 2 ? 160 : 256));
    atoms.push_back(caller());
    atoms.push_back(mapping(param(0), 2, "_owners[...]"));
    auto term = [&](int depth, auto&& self) -> Expr {
        const auto pick = rng() % 6;
        if (depth == 0 || pick < 2) return atoms[rng() % atoms.size()];
        if (pick == 2) return c(rng() % 1000);
        const Op ops[] = {Op::Add, Op::Sub, Op::And, Op::Xor, Op::Eq, Op::Lt};
        return expr::make(ops[rng() % 6], {self(depth - 1, self), self(depth - 1, self)});
    };
    int trials = 0;
    for (; trials < 150; ++trials) {
        ConstraintSet s;
        const int n = static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i) s = s.push(make_constraint(rels[rng() % 10], term(2, term), term(2, term)));
        const auto k = make_constraint(rels[rng() % 10], term(3, term), term(3, term));
        const auto both = s.push(k).push(negate(k));
        INFO(k.str());
        CHECK(solve(both) == SolveResult::Unsat);
    }
    CHECK(trials >= 100);
}

TEST_CASE("sets built from a model are never refuted") {
    std::mt19937_64 rng(99);
    int sat = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<U256> model;
        std::vector<Expr> vars;
        for (int i = 0; i < 4; ++i) {
            vars.push_back(param(i));
            model.push_back(U256(rng() % 50));
        }
        ConstraintSet s;
        for (int i = 0; i < 5; ++i) {
            const int a = static_cast<int>(rng() % 4);
            const int b = static_cast<int>(rng() % 4);
            const U256 k(rng() % 50);
            const U256 lhs = model[static_cast<std::size_t>(a)] + k;
            const U256& rhs = model[static_cast<std::size_t>(b)];
            Relation r = Relation::Eq;
            if (lhs == rhs) r = rng() % 2 ? Relation::Eq : Relation::Uge;
            else r = lhs < rhs ? Relation::Ult : Relation::Ugt;
            s = s.push(make_constraint(r, expr::add(vars[static_cast<std::size_t>(a)], expr::constant(k)), vars[static_cast<std::size_t>(b)]));
        }
        const auto res = solve(s);
        CHECK(res != SolveResult::Unsat);
        sat += res == SolveResult::Sat;
    }
    CHECK(sat >= 90);
}

TEST_CASE("contains finds caller against storage direct") {
    const auto secret = direct(3, "_secretOwner");
    const auto holder = expr::band(mapping(param(2), 2, "_owners[...]"), expr::constant(U256::low_mask(160)));
    const auto guard = expr::make(Op::Or, {expr::eq(caller(), holder), expr::eq(caller(), secret)});
    const auto fig1 = of({make_constraint(Relation::Nonzero, guard)});
    CHECK(contains(fig1, caller_eq_direct()));
    const auto hit = find_match(fig1, caller_eq_direct());
    REQUIRE(hit);
    CHECK(hit->rel == Relation::Eq);

    const auto plain = of({make_constraint(Relation::Eq, secret, caller())});
    CHECK(contains(plain, caller_eq_direct()));

    const auto standard = of({make_constraint(Relation::Eq, caller(), holder), make_constraint(Relation::Neq, param(1, 160), c(0))});
    CHECK_FALSE(contains(standard, caller_eq_direct()));
    CHECK_FALSE(contains(ConstraintSet{}, caller_eq_direct()));
}

TEST_CASE("contains ignores order") {
    const auto a = make_constraint(Relation::Eq, caller(), direct(4, "admin"));
    const auto b = make_constraint(Relation::Neq, param(0), c(0));
    CHECK(contains(of({a, b}), caller_eq_direct()) == contains(of({b, a}), caller_eq_direct()));
}

TEST_CASE("backend selection") {
    CHECK(make_backend("builtin")->name() == "builtin");
    CHECK_THROWS_AS(make_backend("z3"), Error);
}
