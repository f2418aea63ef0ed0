#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "sleepscan/expr.hpp"
#include "sleepscan/ingest.hpp"

namespace sleepscan {

enum class Relation : std::uint8_t { Eq, Neq, Ult, Ugt, Ule, Uge, Slt, Sgt, Nonzero, Zero };

std::string_view to_string(Relation r);

struct Constraint {
    Relation rel = Relation::Nonzero;
    Expr lhs;
    Expr rhs;  // Const 0 for nonzero/zero
    std::uint32_t pc = 0;
    SrcSpan span;

    std::string str() const;
};

Constraint make_constraint(Relation rel, Expr lhs, Expr rhs = nullptr, std::uint32_t pc = 0, SrcSpan span = {});

/// Exact relational negation (eq <-> neq, ult <-> uge, ugt <-> ule, nonzero <-> zero,
/// slt(a,b) -> zero(slt(a,b)), sgt(a,b) -> zero(slt(b,a))).
Constraint negate(const Constraint& c);

/// Branch condition as a relational literal: peels iszero chains and turns
/// eq/lt/slt/sub/xor conditions into the matching relation.
Constraint from_condition(const Expr& cond, bool holds, std::uint32_t pc = 0, SrcSpan span = {});

/// Evaluates a constraint under concrete values of both sides.
bool holds(Relation rel, const U256& lhs, const U256& rhs);

/// Persistent append-only list; copies are O(1) snapshots.
class ConstraintSet {
public:
    ConstraintSet() = default;

    ConstraintSet push(Constraint c) const;
    std::size_t size() const { return head_ ? head_->size : 0; }
    bool empty() const { return size() == 0; }
    /// Constraints in push order.
    std::vector<Constraint> items() const;

private:
    struct Cell {
        Constraint c;
        std::shared_ptr<const Cell> prev;
        std::size_t size = 0;
    };
    std::shared_ptr<const Cell> head_;
};

enum class SolveResult { Sat, Unsat, Unknown };

std::string_view to_string(SolveResult r);

struct SolverOptions {
    std::chrono::milliseconds time_limit{10000};
    std::uint64_t seed = 0x5eed;
    int max_iterations = 4000;
};

/// Decision procedure for a conjunction of bit-vector literals.
class SolverBackend {
public:
    virtual ~SolverBackend() = default;
    virtual std::string_view name() const = 0;
    virtual SolveResult check(const std::vector<Constraint>& conjunction, const SolverOptions& opts) const = 0;
};

/// "builtin" is the only backend compiled in. Throws Error(BackendUnavailable).
std::unique_ptr<SolverBackend> make_backend(std::string_view name);

SolveResult solve(const ConstraintSet& set, const SolverOptions& opts = {});
/// Cheap syntactic check used when forking: c is ground-false or the exact
/// complement of a literal already in the set.
bool directly_contradicts(const ConstraintSet& set, const Constraint& c);
SolveResult solve(const std::vector<Constraint>& conjunction, const SolverOptions& opts = {});

struct ConstraintPattern {
    Relation rel = Relation::Eq;
    std::function<bool(const Expr&)> lhs;
    std::function<bool(const Expr&)> rhs;
};

/// True when some constraint, or a disjunct of a satisfied `or` guard, matches
/// the pattern in either operand order (address masks ignored).
bool contains(const ConstraintSet& set, const ConstraintPattern& pattern);
/// The first matching constraint, for witnesses.
std::optional<Constraint> find_match(const ConstraintSet& set, const ConstraintPattern& pattern);
/// Every matching constraint (disjuncts normalised), unstripped, in set order.
std::vector<Constraint> find_matches(const ConstraintSet& set, const ConstraintPattern& pattern);

}  // namespace sleepscan
