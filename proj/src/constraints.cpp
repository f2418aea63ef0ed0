#include "sleepscan/constraints.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "sleepscan/error.hpp"

namespace sleepscan {

std::string_view to_string(Relation r) {
    switch (r) {
        case Relation::Eq: return "eq";
        case Relation::Neq: return "neq";
        case Relation::Ult: return "ult";
        case Relation::Ugt: return "ugt";
        case Relation::Ule: return "ule";
        case Relation::Uge: return "uge";
        case Relation::Slt: return "slt";
        case Relation::Sgt: return "sgt";
        case Relation::Nonzero: return "nonzero";
        case Relation::Zero: return "zero";
    }
    return "?";
}

std::string_view to_string(SolveResult r) {
    switch (r) {
        case SolveResult::Sat: return "sat";
        case SolveResult::Unsat: return "unsat";
        case SolveResult::Unknown: return "unknown";
    }
    return "?";
}

std::string Constraint::str() const {
    static const char* infix[] = {" == ", " != ", " <u ", " >u ", " <=u ", " >=u ", " <s ", " >s "};
    if (rel == Relation::Nonzero) return expr::to_string(lhs) + " != 0";
    if (rel == Relation::Zero) return expr::to_string(lhs) + " == 0";
    return expr::to_string(lhs) + infix[static_cast<int>(rel)] + expr::to_string(rhs);
}

Constraint make_constraint(Relation rel, Expr lhs, Expr rhs, std::uint32_t pc, SrcSpan span) {
    if (!rhs) rhs = expr::constant(U256());
    return Constraint{rel, std::move(lhs), std::move(rhs), pc, span};
}

Constraint negate(const Constraint& c) {
    Constraint out = c;
    switch (c.rel) {
        case Relation::Eq: out.rel = Relation::Neq; break;
        case Relation::Neq: out.rel = Relation::Eq; break;
        case Relation::Ult: out.rel = Relation::Uge; break;
        case Relation::Uge: out.rel = Relation::Ult; break;
        case Relation::Ugt: out.rel = Relation::Ule; break;
        case Relation::Ule: out.rel = Relation::Ugt; break;
        case Relation::Nonzero: out.rel = Relation::Zero; break;
        case Relation::Zero: out.rel = Relation::Nonzero; break;
        case Relation::Slt:
            out.rel = Relation::Zero;
            out.lhs = expr::slt(c.lhs, c.rhs);
            out.rhs = expr::constant(U256());
            break;
        case Relation::Sgt:
            out.rel = Relation::Zero;
            out.lhs = expr::slt(c.rhs, c.lhs);
            out.rhs = expr::constant(U256());
            break;
    }
    return out;
}

Constraint from_condition(const Expr& cond, bool polarity, std::uint32_t pc, SrcSpan span) {
    Expr x = cond;
    while (x->op == Op::IsZero) {
        x = x->args[0];
        polarity = !polarity;
    }
    const auto zero = expr::constant(U256());
    switch (x->op) {
        case Op::Eq: return make_constraint(polarity ? Relation::Eq : Relation::Neq, x->args[0], x->args[1], pc, span);
        case Op::Lt: return make_constraint(polarity ? Relation::Ult : Relation::Uge, x->args[0], x->args[1], pc, span);
        case Op::Slt:
            if (polarity) return make_constraint(Relation::Slt, x->args[0], x->args[1], pc, span);
            break;
        case Op::Sub:
        case Op::Xor: return make_constraint(polarity ? Relation::Neq : Relation::Eq, x->args[0], x->args[1], pc, span);
        case Op::Add:
            if (expr::is_const(x->args[1])) {
                return make_constraint(polarity ? Relation::Neq : Relation::Eq, x->args[0], expr::constant(U256() - x->args[1]->value), pc, span);
            }
            break;
        default: break;
    }
    return make_constraint(polarity ? Relation::Nonzero : Relation::Zero, x, zero, pc, span);
}

bool holds(Relation rel, const U256& a, const U256& b) {
    switch (rel) {
        case Relation::Eq: return a == b;
        case Relation::Neq: return a != b;
        case Relation::Ult: return a < b;
        case Relation::Ugt: return a > b;
        case Relation::Ule: return a <= b;
        case Relation::Uge: return a >= b;
        case Relation::Slt: return evm_arith::slt(a, b);
        case Relation::Sgt: return evm_arith::slt(b, a);
        case Relation::Nonzero: return !a.is_zero();
        case Relation::Zero: return a.is_zero();
    }
    return false;
}

ConstraintSet ConstraintSet::push(Constraint c) const {
    auto cell = std::make_shared<Cell>();
    cell->c = std::move(c);
    cell->prev = head_;
    cell->size = size() + 1;
    ConstraintSet out;
    out.head_ = std::move(cell);
    return out;
}

std::vector<Constraint> ConstraintSet::items() const {
    std::vector<Constraint> out;
    out.reserve(size());
    for (const Cell* c = head_.get(); c; c = c->prev.get()) out.push_back(c->c);
    std::reverse(out.begin(), out.end());
    return out;
}

namespace {

// Canonical literal: a relation from {Eq, Neq, Ult, Uge, Slt, Sge} over two terms.
enum class Lk : std::uint8_t { Eq, Neq, Ult, Uge, Slt, Sge };

struct Lit {
    Lk k;
    Expr a;
    Expr b;
};

Lk complement(Lk k) {
    switch (k) {
        case Lk::Eq: return Lk::Neq;
        case Lk::Neq: return Lk::Eq;
        case Lk::Ult: return Lk::Uge;
        case Lk::Uge: return Lk::Ult;
        case Lk::Slt: return Lk::Sge;
        case Lk::Sge: return Lk::Slt;
    }
    return Lk::Eq;
}

Lit ordered(Lk k, Expr a, Expr b) {
    if ((k == Lk::Eq || k == Lk::Neq)) {
        const bool ca = expr::is_const(a);
        const bool cb = expr::is_const(b);
        if ((ca && !cb) || (ca == cb && b->hash < a->hash)) std::swap(a, b);
    }
    return Lit{k, std::move(a), std::move(b)};
}

Lit canon(const Constraint& c) {
    const auto zero = expr::constant(U256());
    switch (c.rel) {
        case Relation::Eq: return ordered(Lk::Eq, c.lhs, c.rhs);
        case Relation::Neq: return ordered(Lk::Neq, c.lhs, c.rhs);
        case Relation::Ult: return Lit{Lk::Ult, c.lhs, c.rhs};
        case Relation::Ugt: return Lit{Lk::Ult, c.rhs, c.lhs};
        case Relation::Ule: return Lit{Lk::Uge, c.rhs, c.lhs};
        case Relation::Uge: return Lit{Lk::Uge, c.lhs, c.rhs};
        case Relation::Slt: return Lit{Lk::Slt, c.lhs, c.rhs};
        case Relation::Sgt: return Lit{Lk::Slt, c.rhs, c.lhs};
        case Relation::Nonzero: {
            const Constraint r = from_condition(c.lhs, true);
            if (r.rel == Relation::Nonzero) return ordered(Lk::Neq, r.lhs, zero);
            return canon(r);
        }
        case Relation::Zero: {
            const Constraint r = from_condition(c.lhs, false);
            if (r.rel == Relation::Zero) {
                if (r.lhs->op == Op::Slt) return Lit{Lk::Sge, r.lhs->args[0], r.lhs->args[1]};
                return ordered(Lk::Eq, r.lhs, zero);
            }
            return canon(r);
        }
    }
    return Lit{Lk::Eq, c.lhs, c.rhs};
}

bool lit_holds(Lk k, const U256& a, const U256& b) {
    switch (k) {
        case Lk::Eq: return a == b;
        case Lk::Neq: return a != b;
        case Lk::Ult: return a < b;
        case Lk::Uge: return a >= b;
        case Lk::Slt: return evm_arith::slt(a, b);
        case Lk::Sge: return !evm_arith::slt(a, b);
    }
    return false;
}

bool same_lit(const Lit& x, const Lit& y) { return x.k == y.k && expr::equal(x.a, y.a) && expr::equal(x.b, y.b); }

using TermMap = std::unordered_map<Expr, int, ExprHash, ExprEq>;

class UnionFind {
public:
    int id(const Expr& e) {
        const auto it = ids_.find(e);
        if (it != ids_.end()) return it->second;
        const int n = static_cast<int>(parent_.size());
        ids_.emplace(e, n);
        parent_.push_back(n);
        constant_.push_back(expr::as_const(e));
        return n;
    }
    int find(int x) {
        while (parent_[static_cast<std::size_t>(x)] != x) {
            parent_[static_cast<std::size_t>(x)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
            x = parent_[static_cast<std::size_t>(x)];
        }
        return x;
    }
    // False on a constant clash.
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return true;
        auto& ca = constant_[static_cast<std::size_t>(a)];
        const auto& cb = constant_[static_cast<std::size_t>(b)];
        if (ca && cb && *ca != *cb) return false;
        if (!ca) ca = cb;
        parent_[static_cast<std::size_t>(b)] = a;
        return true;
    }
    std::optional<U256> constant(int x) { return constant_[static_cast<std::size_t>(find(x))]; }

private:
    TermMap ids_;
    std::vector<int> parent_;
    std::vector<std::optional<U256>> constant_;
};

// Cheap refutation: complements, equality classes, constant clashes.
bool refuted(const std::vector<Lit>& lits) {
    for (std::size_t i = 0; i < lits.size(); ++i) {
        const Lk want = complement(lits[i].k);
        for (std::size_t j = i + 1; j < lits.size(); ++j) {
            if (lits[j].k == want && expr::equal(lits[i].a, lits[j].a) && expr::equal(lits[i].b, lits[j].b)) return true;
        }
    }
    UnionFind uf;
    for (const auto& l : lits) {
        if (l.k == Lk::Eq && !uf.unite(uf.id(l.a), uf.id(l.b))) return true;
    }
    for (const auto& l : lits) {
        const int a = uf.id(l.a);
        const int b = uf.id(l.b);
        const bool same = uf.find(a) == uf.find(b);
        const auto ca = uf.constant(a);
        const auto cb = uf.constant(b);
        switch (l.k) {
            case Lk::Neq:
            case Lk::Ult:
            case Lk::Slt:
                if (same) return true;
                break;
            default: break;
        }
        if (ca && cb && !lit_holds(l.k, *ca, *cb)) return true;
        if (l.k == Lk::Ult && cb && cb->is_zero()) return true;
    }
    return false;
}

void collect_vars(const Expr& e, TermMap& vars, std::vector<Expr>& order, std::unordered_set<const Node*>& seen) {
    if (!seen.insert(e.get()).second) return;
    if (e->op == Op::Var) {
        if (vars.emplace(e, static_cast<int>(order.size())).second) order.push_back(e);
        if (e->var->key) collect_vars(e->var->key, vars, order, seen);
        return;
    }
    for (const auto& a : e->args) collect_vars(a, vars, order, seen);
}

void collect_sha3(const Expr& e, std::vector<Expr>& out, std::unordered_set<const Node*>& seen) {
    if (!seen.insert(e.get()).second) return;
    if (e->op == Op::Sha3) {
        if (std::none_of(out.begin(), out.end(), [&](const Expr& x) { return expr::equal(x, e); })) out.push_back(e);
    }
    if (e->op == Op::Var && e->var->key) collect_sha3(e->var->key, out, seen);
    for (const auto& a : e->args) collect_sha3(a, out, seen);
}

void collect_consts(const Expr& e, std::vector<U256>& out) {
    if (e->op == Op::Const) {
        out.push_back(e->value);
        return;
    }
    for (const auto& a : e->args) collect_consts(a, out);
}

class LocalSearch {
public:
    LocalSearch(std::vector<Lit> lits, const SolverOptions& opts) : lits_(std::move(lits)), opts_(opts), rng_(opts.seed) {
        std::unordered_set<const Node*> seen;
        std::unordered_set<const Node*> seen_sha;
        for (const auto& l : lits_) {
            for (const Expr* side : {&l.a, &l.b}) {
                collect_vars(*side, var_index_, vars_, seen);
                collect_sha3(*side, sha3_, seen_sha);
                collect_consts(*side, consts_);
            }
        }
        std::sort(consts_.begin(), consts_.end());
        consts_.erase(std::unique(consts_.begin(), consts_.end()), consts_.end());
        if (consts_.size() > 64) consts_.resize(64);
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i]->var->kind == VarKind::StorageDirect || vars_[i]->var->kind == VarKind::StorageMapping) storage_.push_back(static_cast<int>(i));
        }
        // Which literals mention which variable.
        lits_of_.resize(vars_.size());
        for (std::size_t li = 0; li < lits_.size(); ++li) {
            TermMap local;
            std::vector<Expr> order;
            std::unordered_set<const Node*> s;
            collect_vars(lits_[li].a, local, order, s);
            collect_vars(lits_[li].b, local, order, s);
            for (const auto& v : order) lits_of_[static_cast<std::size_t>(var_index_.at(v))].push_back(static_cast<int>(li));
        }
        values_.resize(vars_.size());
        for (std::size_t i = 0; i < vars_.size(); ++i) values_[i] = masked(static_cast<int>(i), U256(0x10000 + 0x101 * i));
    }

    SolveResult run() {
        const auto deadline = std::chrono::steady_clock::now() + opts_.time_limit;
        propagate_equalities();
        std::vector<char> ok(lits_.size());
        for (std::size_t i = 0; i < lits_.size(); ++i) ok[i] = eval_lit(static_cast<int>(i));
        for (int iter = 0; iter < opts_.max_iterations; ++iter) {
            std::vector<int> failing;
            for (std::size_t i = 0; i < lits_.size(); ++i) {
                if (!ok[i]) failing.push_back(static_cast<int>(i));
            }
            std::vector<int> implicit_vars = implicit_violations();
            if (failing.empty() && implicit_vars.empty()) return SolveResult::Sat;
            if ((iter & 15) == 0 && std::chrono::steady_clock::now() > deadline) return SolveResult::Unknown;

            // Variables to perturb.
            std::vector<int> focus;
            if (!failing.empty() && (implicit_vars.empty() || rng_() % 2 == 0)) {
                const int li = failing[rng_() % failing.size()];
                TermMap local;
                std::vector<Expr> order;
                std::unordered_set<const Node*> s;
                collect_vars(lits_[static_cast<std::size_t>(li)].a, local, order, s);
                collect_vars(lits_[static_cast<std::size_t>(li)].b, local, order, s);
                for (const auto& v : order) focus.push_back(var_index_.at(v));
            } else {
                focus = implicit_vars;
            }
            if (focus.empty()) return SolveResult::Unknown;  // ground literal that is false

            int best_var = -1;
            U256 best_val;
            long best_score = -1;
            const bool noisy = rng_() % 10 == 0;
            for (int v : focus) {
                const U256 saved = values_[static_cast<std::size_t>(v)];
                for (const U256& cand : candidates(v, failing)) {
                    values_[static_cast<std::size_t>(v)] = cand;
                    const long score = score_with(v, ok);
                    if (best_score < 0 || score < best_score || (score == best_score && rng_() % 3 == 0)) {
                        best_score = score;
                        best_var = v;
                        best_val = cand;
                    }
                }
                values_[static_cast<std::size_t>(v)] = saved;
            }
            if (noisy) {
                best_var = focus[rng_() % focus.size()];
                auto cs = candidates(best_var, failing);
                best_val = cs[rng_() % cs.size()];
            }
            if (best_var < 0) return SolveResult::Unknown;
            values_[static_cast<std::size_t>(best_var)] = best_val;
            for (int li : lits_of_[static_cast<std::size_t>(best_var)]) ok[static_cast<std::size_t>(li)] = eval_lit(li);
        }
        return SolveResult::Unknown;
    }

private:
    U256 masked(int v, const U256& x) const {
        const unsigned bits = vars_[static_cast<std::size_t>(v)]->bits;
        return bits >= 256 ? x : (x & U256::low_mask(bits));
    }

    U256 eval(const Expr& e, std::unordered_map<const Node*, U256>& memo) const {
        switch (e->op) {
            case Op::Const: return e->value;
            case Op::Var: return values_[static_cast<std::size_t>(var_index_.at(e))];
            default: break;
        }
        const auto it = memo.find(e.get());
        if (it != memo.end()) return it->second;
        std::vector<U256> args;
        args.reserve(e->args.size());
        for (const auto& a : e->args) args.push_back(eval(a, memo));
        const U256 v = expr::fold(e->op, args);
        memo.emplace(e.get(), v);
        return v;
    }

    U256 eval(const Expr& e) const {
        std::unordered_map<const Node*, U256> memo;
        return eval(e, memo);
    }

    bool eval_lit(int li) const {
        std::unordered_map<const Node*, U256> memo;
        const Lit& l = lits_[static_cast<std::size_t>(li)];
        return lit_holds(l.k, eval(l.a, memo), eval(l.b, memo));
    }

    // Variables involved in violated hash-injectivity or storage-congruence axioms.
    std::vector<int> implicit_violations() const {
        std::vector<int> out;
        if (sha3_.size() > 1) {
            std::vector<U256> hv;
            hv.reserve(sha3_.size());
            for (const auto& s : sha3_) hv.push_back(eval(s));
            for (std::size_t i = 0; i < sha3_.size() && out.empty(); ++i) {
                for (std::size_t j = i + 1; j < sha3_.size(); ++j) {
                    if (hv[i] == hv[j]) {
                        add_vars(sha3_[i], out);
                        add_vars(sha3_[j], out);
                        break;
                    }
                }
            }
        }
        for (std::size_t i = 0; i < storage_.size() && out.empty(); ++i) {
            for (std::size_t j = i + 1; j < storage_.size(); ++j) {
                const int a = storage_[i];
                const int b = storage_[j];
                const Expr& ka = vars_[static_cast<std::size_t>(a)]->var->key;
                const Expr& kb = vars_[static_cast<std::size_t>(b)]->var->key;
                if (!ka || !kb) continue;
                if (eval(ka) == eval(kb) && values_[static_cast<std::size_t>(a)] != values_[static_cast<std::size_t>(b)]) {
                    out.push_back(a);
                    out.push_back(b);
                    add_vars(ka, out);
                    add_vars(kb, out);
                    break;
                }
            }
        }
        return out;
    }

    void add_vars(const Expr& e, std::vector<int>& out) const {
        TermMap local;
        std::vector<Expr> order;
        std::unordered_set<const Node*> s;
        collect_vars(e, local, order, s);
        for (const auto& v : order) {
            const int idx = var_index_.at(v);
            if (std::find(out.begin(), out.end(), idx) == out.end()) out.push_back(idx);
        }
    }

    long score_with(int v, const std::vector<char>& ok) const {
        long failures = 0;
        for (std::size_t i = 0; i < ok.size(); ++i) failures += ok[i] ? 0 : 1;
        for (int li : lits_of_[static_cast<std::size_t>(v)]) {
            const bool now = eval_lit(li);
            const bool before = ok[static_cast<std::size_t>(li)] != 0;
            failures += (before ? 0 : -1) + (now ? 0 : 1);
        }
        return failures * 4 + static_cast<long>(implicit_violations().size() > 0 ? 2 : 0);
    }

    // Values that would make the term containing v take a wanted value.
    void invert_into(const Expr& side, int v, const U256& target, std::vector<U256>& out, int depth = 0) const {
        if (depth > 6) return;
        if (side->op == Op::Var) {
            if (var_index_.at(side) == v) out.push_back(target);
            return;
        }
        auto has_v = [&](const Expr& e) {
            TermMap local;
            std::vector<Expr> order;
            std::unordered_set<const Node*> s;
            collect_vars(e, local, order, s);
            return std::any_of(order.begin(), order.end(), [&](const Expr& x) { return var_index_.at(x) == v; });
        };
        if (side->args.size() != 2 && side->op != Op::Not && side->op != Op::IsZero) return;
        switch (side->op) {
            case Op::Add:
                if (has_v(side->args[0])) invert_into(side->args[0], v, target - eval(side->args[1]), out, depth + 1);
                else invert_into(side->args[1], v, target - eval(side->args[0]), out, depth + 1);
                break;
            case Op::Sub:
                if (has_v(side->args[0])) invert_into(side->args[0], v, target + eval(side->args[1]), out, depth + 1);
                else invert_into(side->args[1], v, eval(side->args[0]) - target, out, depth + 1);
                break;
            case Op::Xor:
                if (has_v(side->args[0])) invert_into(side->args[0], v, target ^ eval(side->args[1]), out, depth + 1);
                else invert_into(side->args[1], v, target ^ eval(side->args[0]), out, depth + 1);
                break;
            case Op::And:
            case Op::Or:
                if (has_v(side->args[0])) invert_into(side->args[0], v, target, out, depth + 1);
                else invert_into(side->args[1], v, target, out, depth + 1);
                break;
            case Op::Not: invert_into(side->args[0], v, ~target, out, depth + 1); break;
            case Op::IsZero:
                invert_into(side->args[0], v, target.is_zero() ? U256(1) : U256(0), out, depth + 1);
                break;
            case Op::Shr:
                if (auto k = expr::as_const(side->args[0]); k && k->fits_u64() && k->low64() < 256) {
                    invert_into(side->args[1], v, target << static_cast<unsigned>(k->low64()), out, depth + 1);
                }
                break;
            case Op::Shl:
                if (auto k = expr::as_const(side->args[0]); k && k->fits_u64() && k->low64() < 256) {
                    invert_into(side->args[1], v, target >> static_cast<unsigned>(k->low64()), out, depth + 1);
                }
                break;
            case Op::Mul:
                if (auto k = expr::as_const(side->args[1]); k && *k == U256(1)) invert_into(side->args[0], v, target, out, depth + 1);
                break;
            default: break;
        }
    }

    std::vector<U256> candidates(int v, const std::vector<int>& failing) {
        const U256 cur = values_[static_cast<std::size_t>(v)];
        std::vector<U256> out{U256(0), U256(1), cur + U256(1), cur - U256(1), U256(0x20000 + (rng_() & 0xffff))};
        U256 r(rng_(), rng_(), rng_(), rng_());
        out.push_back(r);
        for (std::size_t i = 0; i < consts_.size() && i < 16; ++i) {
            const U256& c = consts_[rng_() % consts_.size()];
            out.push_back(c);
            out.push_back(c + U256(1));
            out.push_back(c - U256(1));
        }
        for (int li : failing) {
            const Lit& l = lits_[static_cast<std::size_t>(li)];
            const U256 va = eval(l.a);
            const U256 vb = eval(l.b);
            for (const U256& t : {vb, vb + U256(1), vb - U256(1)}) invert_into(l.a, v, t, out);
            for (const U256& t : {va, va + U256(1), va - U256(1)}) invert_into(l.b, v, t, out);
        }
        // Storage congruence: copy a same-slot value.
        for (int s : storage_) {
            if (s != v) out.push_back(values_[static_cast<std::size_t>(s)]);
        }
        for (auto& c : out) c = masked(v, c);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        if (out.size() > 48) {
            std::shuffle(out.begin(), out.end(), rng_);
            out.resize(48);
        }
        return out;
    }

    void propagate_equalities() {
        for (int pass = 0; pass < 3; ++pass) {
            for (const auto& l : lits_) {
                if (l.k != Lk::Eq) continue;
                for (const auto& [x, y] : {std::pair{l.a, l.b}, std::pair{l.b, l.a}}) {
                    const Expr bare = expr::strip_address_mask(x);
                    if (bare->op == Op::Var) {
                        const int v = var_index_.at(bare);
                        values_[static_cast<std::size_t>(v)] = masked(v, eval(y));
                        break;
                    }
                }
            }
        }
    }

    std::vector<Lit> lits_;
    SolverOptions opts_;
    std::mt19937_64 rng_;
    TermMap var_index_;
    std::vector<Expr> vars_;
    std::vector<U256> values_;
    std::vector<Expr> sha3_;
    std::vector<int> storage_;
    std::vector<U256> consts_;
    std::vector<std::vector<int>> lits_of_;
};

class BuiltinBackend final : public SolverBackend {
public:
    std::string_view name() const override { return "builtin"; }

    SolveResult check(const std::vector<Constraint>& conjunction, const SolverOptions& opts) const override {
        std::vector<Lit> lits;
        lits.reserve(conjunction.size());
        for (const auto& c : conjunction) {
            Lit l = canon(c);
            // Ground literals are decided now.
            if (expr::is_const(l.a) && expr::is_const(l.b)) {
                if (!lit_holds(l.k, l.a->value, l.b->value)) return SolveResult::Unsat;
                continue;
            }
            if (std::none_of(lits.begin(), lits.end(), [&](const Lit& x) { return same_lit(x, l); })) lits.push_back(std::move(l));
        }
        if (lits.empty()) return SolveResult::Sat;
        if (refuted(lits)) return SolveResult::Unsat;
        return LocalSearch(std::move(lits), opts).run();
    }
};

// Flattens the operands of nested `or` nodes.
void disjuncts(const Expr& e, std::vector<Expr>& out) {
    if (e->op == Op::Or) {
        for (const auto& a : e->args) disjuncts(a, out);
    } else {
        out.push_back(e);
    }
}

bool matches(const Constraint& c, const ConstraintPattern& p) {
    if (c.rel != p.rel) return false;
    const Expr l = expr::strip_address_mask(c.lhs);
    const Expr r = expr::strip_address_mask(c.rhs);
    return (p.lhs(l) && p.rhs(r)) || (p.lhs(r) && p.rhs(l));
}

}  // namespace

std::unique_ptr<SolverBackend> make_backend(std::string_view name) {
    if (name == "builtin" || name.empty()) return std::make_unique<BuiltinBackend>();
    throw Error(ErrorCode::BackendUnavailable, "solver backend '" + std::string(name) + "' is not available (only 'builtin')");
}

SolveResult solve(const std::vector<Constraint>& conjunction, const SolverOptions& opts) {
    static const BuiltinBackend backend;
    return backend.check(conjunction, opts);
}

SolveResult solve(const ConstraintSet& set, const SolverOptions& opts) { return solve(set.items(), opts); }

bool directly_contradicts(const ConstraintSet& set, const Constraint& c) {
    const Lit l = canon(c);
    if (expr::is_const(l.a) && expr::is_const(l.b)) return !lit_holds(l.k, l.a->value, l.b->value);
    const Lit want{complement(l.k), l.a, l.b};
    for (const auto& x : set.items()) {
        if (same_lit(canon(x), want)) return true;
    }
    return false;
}

std::vector<Constraint> find_matches(const ConstraintSet& set, const ConstraintPattern& pattern) {
    std::vector<Constraint> out;
    for (const auto& c : set.items()) {
        if (matches(c, pattern)) out.push_back(c);
        if (c.rel == Relation::Nonzero && c.lhs->op == Op::Or) {
            std::vector<Expr> parts;
            disjuncts(c.lhs, parts);
            for (const auto& d : parts) {
                const Constraint dc = from_condition(d, true, c.pc, c.span);
                if (matches(dc, pattern)) out.push_back(dc);
            }
        }
    }
    return out;
}

std::optional<Constraint> find_match(const ConstraintSet& set, const ConstraintPattern& pattern) {
    auto all = find_matches(set, pattern);
    if (all.empty()) return std::nullopt;
    return all.front();
}

bool contains(const ConstraintSet& set, const ConstraintPattern& pattern) { return find_match(set, pattern).has_value(); }

}  // namespace sleepscan
