#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sleepscan/ast_analysis.hpp"
#include "sleepscan/constraints.hpp"
#include "sleepscan/disasm.hpp"
#include "sleepscan/expr.hpp"
#include "sleepscan/ingest.hpp"

namespace sleepscan {

/// Why a path stopped early.
enum class Diagnostic : std::uint8_t {
    StackUnderflow,
    StackOverflow,
    UnknownJumpTarget,
    InvalidJumpTarget,
    LoopBound,
    StepBudget,
    PathBudget,
    Timeout,
};

std::string_view to_string(Diagnostic d);

/// Thrown by step() for conditions that kill the current path only.
class PathError : public std::runtime_error {
public:
    PathError(Diagnostic d, const std::string& what) : std::runtime_error(what), diagnostic_(d) {}
    Diagnostic diagnostic() const noexcept { return diagnostic_; }

private:
    Diagnostic diagnostic_;
};

struct ExplorationBudget {
    int loop_bound = 3;
    std::uint64_t max_steps = 100000;  // per function, summed over paths
    std::size_t max_paths = 4096;
    std::chrono::steady_clock::time_point deadline = std::chrono::steady_clock::time_point::max();
};

struct EventEmission {
    Expr topic0;  // null for LOG0
    std::vector<Expr> topics;  // indexed arguments after topic0
    Expr data_offset;
    Expr data_size;
    std::uint32_t at_pc = 0;
};

enum class MemWriteKind : std::uint8_t { Word, Byte, Havoc };

struct MemWrite {
    MemWriteKind kind = MemWriteKind::Word;
    Expr offset;
    Expr value;  // unused for Havoc
    Expr size;   // Havoc only
    std::uint32_t serial = 0;
};

struct StorageWrite {
    Expr slot;
    Expr value;
};

struct MachineState {
    std::uint32_t pc = 0;
    std::vector<Expr> stack;
    std::vector<MemWrite> memory;
    std::vector<StorageWrite> storage;
    ConstraintSet constraints;
    bool sstore_mark = false;
    std::vector<Expr> owner_trace;
    std::vector<EventEmission> emissions;
    std::uint64_t steps_used = 0;
    bool tainted = false;

    // Exploration bookkeeping.
    bool reached_entry = false;
    bool in_owner_return = false;
    bool owner_call = false;  // the run was left through a call inside the return expression
    std::uint32_t fresh = 0;
    std::map<std::uint64_t, int> visits;
    std::vector<std::size_t> pending_emissions;  // record ids awaiting an exit
};

/// Read-only context of one exploration.
struct ExecContext {
    const Cfg* cfg = nullptr;
    const CompilationUnit* unit = nullptr;  // optional; names and source spans
    const FunctionInfo* function = nullptr;  // optional; parameter typing
    std::uint32_t selector = 0;
    const ReturnBinding* binding = nullptr;

    std::optional<SrcSpan> span_at(std::uint32_t pc) const;
    std::optional<JumpKind> jump_at(std::uint32_t pc) const;
};

enum class EndKind : std::uint8_t { TransferEmission, NormalExit, Revert, BudgetExhausted };

std::string_view to_string(EndKind k);

struct PathRecord {
    std::size_t id = 0;
    std::size_t path_id = 0;
    FunctionInfo function;
    EndKind end_kind = EndKind::NormalExit;
    ConstraintSet constraints;
    std::vector<Expr> owner_trace;
    Expr from_param;
    Expr to_param;
    Expr token_param;
    bool sstore_mark_at_emission = false;
    bool sstore_mark_at_exit = false;
    std::uint32_t pc = 0;
    bool tainted = false;
    std::optional<Diagnostic> diagnostic;
    /// For exits: the emission records this path passed through.
    std::vector<std::size_t> continues;
};

struct ExplorationResult {
    std::vector<PathRecord> records;
    std::size_t paths = 0;
    std::size_t dispatch_misses = 0;
    std::uint64_t steps = 0;
    bool timed_out = false;
    std::map<Diagnostic, std::size_t> diagnostics;
};

/// Initial state for executing the runtime code from pc 0 with the function's
/// selector in calldata.
MachineState initial_state(const ExecContext& ctx);

/// Semantics of one instruction. Terminators yield no successors; JUMPI on a
/// symbolic condition yields the taken state first.
std::vector<MachineState> step(const ExecContext& ctx, MachineState state, const Instruction& ins);

/// Hooks, exposed for tests.
Expr on_calldataload(const ExecContext& ctx, MachineState& state, const Expr& offset);
void on_sstore(MachineState& state, const Expr& slot, const Expr& value);
/// The emission described by a LOGn on the current stack; nullopt when the
/// stack is too shallow.
std::optional<EventEmission> on_log(const MachineState& state, int topic_count);
bool is_transfer_emission(const EventEmission& e);
/// Updates the return-site run tracking before `pc` executes.
void on_owner_return(const ExecContext& ctx, MachineState& state, std::uint32_t pc);

/// Parameter Var exactly as CALLDATALOAD produces it.
Expr parameter_var(const FunctionInfo* fn, std::size_t index);

/// Explores one function. Throws Error(EntryNotFound).
ExplorationResult explore_function(const CompilationUnit& unit, const Cfg& cfg, const FunctionInfo& fn,
                                   const std::optional<ReturnBinding>& binding, const ExplorationBudget& budget);

}  // namespace sleepscan
