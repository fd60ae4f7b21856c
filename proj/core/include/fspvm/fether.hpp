#pragma once

// FEther: big-step execution of typed Lolisa over GERM memory, metered by gas.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fspvm/lolisa.hpp"
#include "fspvm/memory.hpp"

namespace fspvm {

enum class ExecMode { Concrete, Symbolic };

inline constexpr std::uint64_t kDefaultGasLimit = 1'000'000;
inline constexpr unsigned kDefaultCallDepth = 1024;
inline constexpr std::size_t kDefaultMemSize = 100;

struct Environment {
    std::uint64_t gas_used = 0;
    std::uint64_t gas_limit = kDefaultGasLimit;
    SymExpr msg_sender;
    SymExpr msg_value;
    SymExpr block_number;
    SymExpr now;
    Value this_address;
    unsigned call_depth = 0;
    unsigned max_call_depth = kDefaultCallDepth;
};

/// Transaction parameters; unset fields default to zero values of their types.
struct TxParams {
    std::optional<SymExpr> sender;
    std::optional<SymExpr> value;
    std::optional<SymExpr> block_number;
    std::optional<SymExpr> now;
    std::optional<Value> this_address;
    std::uint64_t gas_limit = kDefaultGasLimit;
    unsigned max_call_depth = kDefaultCallDepth;
};

struct CompiledFunction {
    std::string name;
    std::optional<Visibility> vis;
    std::vector<Param> params;
    std::vector<LType> rets;
    StmtList body;  // modifiers already spliced in
    SourceSpan span;
};

struct StateSlot {
    MemAddress address;
    LType type;
};

struct FunctionEnv {
    std::map<std::string, CompiledFunction> functions;
    StructTable structs;
    std::map<std::string, StateSlot> state;
    /// State variable names in declaration order.
    std::vector<std::string> state_order;
    int uint_width = 256;

    const CompiledFunction* find(const std::string& name) const;
};

enum class FaultKind {
    TypeMismatch,
    UndeclaredRead,
    NotAnLValue,
    UnboundIdentifier,
    UnknownFunction,
    ArityMismatch,
    CallDepthExceeded,
    MemoryFull,
    SymbolicInConcreteMode,
    Unsupported,
};

std::string_view fault_name(FaultKind k);

enum class OutcomeKind { Normal, Reverted, OutOfGas, Fault, Forked };

std::string_view outcome_name(OutcomeKind k);

struct BranchRecord {
    bool taken = false;
    SymExpr guard;  // as written; `taken == false` means its negation was assumed
    SourceSpan span;
};

struct ExecOutcome {
    OutcomeKind kind = OutcomeKind::Normal;
    /// Normal: final memory. Reverted: the entry snapshot. OutOfGas/Fault: memory at the stop.
    MemoryState mem;
    std::vector<SymExpr> returns;
    Environment env;
    std::string revert_reason;
    FaultKind fault = FaultKind::Unsupported;
    std::string fault_message;
    SourceSpan where;
    /// Forked: the undecided guard. Its span is `where`.
    SymExpr fork_guard;
    /// Guards assumed along the way (symbolic mode), and how each was resolved.
    std::vector<Constraint> pc;
    std::vector<BranchRecord> branches;
    std::vector<std::string> trace;

    bool is_normal() const { return kind == OutcomeKind::Normal; }
};

/// Rewrites a symbolic binary operation before simplification; used to
/// inject faults into the symbolic evaluator when testing the diff harness.
using SymbolicBinopHook = std::function<std::optional<SymExpr>(BinOp, const SymExpr&, const SymExpr&)>;

struct ExecOptions {
    ExecMode mode = ExecMode::Concrete;
    /// Branch outcomes for the first forks met in symbolic mode; the next
    /// undecided fork stops execution with OutcomeKind::Forked.
    std::vector<bool> decisions;
    bool trace = false;
    SymbolicBinopHook symbolic_binop_hook;
};

class ExecError : public std::runtime_error {
public:
    ExecError(FaultKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    FaultKind kind() const { return kind_; }

private:
    FaultKind kind_;
};

/// Expands modifiers, allocates state variables (with their initializers
/// evaluated concretely) and fills the environment from `tx`.
/// Throws MemoryError(MemoryFull) or ExecError.
std::tuple<Environment, FunctionEnv, MemoryState> init_env(const Contract& program, const TxParams& tx = {},
                                                          const MemoryState& mem = init_memory(kDefaultMemSize));

Environment set_gas(Environment env, std::uint64_t limit);

/// Evaluates one expression with no enclosing frame (state and built-ins only).
/// Throws ExecError, DomainError(DivByZero) and, when gas runs out, OutOfGasSignal.
struct OutOfGasSignal {};
SymExpr eval_expr(const MemoryState& mem, Environment& env, const FunctionEnv& fenv, const Expr& e,
                  ExecMode mode = ExecMode::Concrete);

/// Executes a statement list as a transaction body at top level.
ExecOutcome run_program(const MemoryState& mem, const Environment& env, const FunctionEnv& fenv,
                        const StmtList& body, const ExecOptions& opts = {});

/// Calls a function as a transaction; arguments must match the parameter types.
ExecOutcome call_function(const MemoryState& mem, const Environment& env, const FunctionEnv& fenv,
                          const std::string& name, const std::vector<SymExpr>& args, const ExecOptions& opts = {});

/// Writes `v` into the state variable's block.
MemoryState set_state(const MemoryState& mem, const FunctionEnv& fenv, const std::string& name, SymExpr v);
SymExpr get_state(const MemoryState& mem, const FunctionEnv& fenv, const std::string& name);

}  // namespace fspvm
