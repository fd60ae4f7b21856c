#pragma once

// Hoare-triple verification by exhaustive bounded path exploration, plus the
// concrete/symbolic differential harness.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fspvm/fether.hpp"
#include "fspvm/solver.hpp"

namespace fspvm {

// ---------------------------------------------------------------- specs

enum class RevertPolicy {
    RevertAllowed,   // `on_revert allow`: post checked on Normal paths only
    RevertRequired,  // `on_revert require`: every feasible path must revert
    PostMustHold,    // `on_revert forbid`: a feasible revert violates the property
};

std::string_view revert_policy_keyword(RevertPolicy p);

struct SpecClause {
    UExprPtr expr;
    std::string text;
    SourceSpan span;
};

struct SpecVar {
    std::string name;
    UType type;
};

struct PropertySpec {
    std::string name;
    SourceSpan span;
    std::string entry;
    /// Identifiers name symbolic arguments; other expressions are fixed values.
    std::vector<UExprPtr> entry_args;
    std::vector<SpecVar> vars;
    std::vector<SpecClause> pre;
    std::vector<SpecClause> post;
    RevertPolicy on_revert = RevertPolicy::RevertAllowed;
};

class SpecError : public std::runtime_error {
public:
    SpecError(const std::string& what, SourceSpan span) : std::runtime_error(span.str() + ": " + what), span_(span) {}
    const SourceSpan& span() const { return span_; }

private:
    SourceSpan span_;
};

/// Parses `property`/`entry`/`var`/`require`/`ensure`/`on_revert` lines; a
/// file may hold several properties. Throws SpecError or SyntaxError.
std::vector<PropertySpec> parse_spec(const std::string& text, const std::string& file = "");

/// A spec typechecked against a contract.
struct BoundSpec {
    PropertySpec spec;
    const FunctionDef* function = nullptr;
    /// Symbolic argument (name, type) or fixed value, per parameter.
    std::vector<std::pair<std::string, LType>> symbolic_args;
    std::vector<std::optional<Value>> fixed_args;
    std::vector<std::pair<std::string, LType>> vars;
    std::vector<ExprPtr> pre;
    std::vector<ExprPtr> post;
};

/// Throws SpecError or TypeErrors.
BoundSpec bind_spec(const Contract& c, const PropertySpec& spec);

// ---------------------------------------------------------------- verification

struct VerifyOptions {
    std::uint64_t gas_limit = kDefaultGasLimit;
    std::size_t mem_size = kDefaultMemSize;
    unsigned max_call_depth = kDefaultCallDepth;
    SolverBudget budget;
    std::size_t max_paths = 4096;
};

struct PathState {
    MemoryState mem;
    Environment env;
    std::vector<Constraint> pc;
    std::vector<BranchRecord> trace;
};

struct ExploredPath {
    PathState state;
    ExecOutcome outcome;
};

struct Exploration {
    std::vector<ExploredPath> paths;
    std::size_t pruned = 0;          // fork branches shown infeasible
    std::size_t feasibility_unknown = 0;
    bool path_budget_hit = false;
    bool pre_unsat = false;
};

/// Symbolic entry state for a bound spec: state variables, arguments,
/// spec variables and transaction fields all become SymVars.
struct EntryState {
    Environment env;
    FunctionEnv fenv;
    MemoryState mem;
    std::vector<SymExpr> args;
    std::map<std::string, SymExpr> locals;  // arguments and spec vars by name
    std::vector<Constraint> pre;
};

EntryState symbolic_entry(const Contract& c, const BoundSpec& spec, const VerifyOptions& opts = {});

/// Breadth-first over fork decisions, then-branch first; forks whose branch
/// condition is Unsat are pruned.
Exploration explore(const Contract& c, const BoundSpec& spec, const VerifyOptions& opts = {});

enum class PostStatus { Holds, Violated, Unknown };

struct PostCheck {
    PostStatus status = PostStatus::Unknown;
    Assignment model;
    std::string note;
    std::vector<Constraint> query;  // what was sent to the solver
};

PostCheck check_post(const EntryState& entry, const BoundSpec& spec, const ExploredPath& path,
                     const SolverBudget& budget = {});

/// Spec clause evaluated over a final memory (old() reads the entry memory).
SymExpr eval_spec(const Expr& e, const EntryState& entry, const MemoryState& final_mem,
                  const std::vector<SymExpr>& returns);

enum class VerdictKind { Proved, Falsified, Unknown };
enum class UnknownReason { GasExhausted, SolverIncomplete, PathBudget, Fault, ReplayMismatch };

std::string_view verdict_name(VerdictKind k);
std::string_view unknown_reason_name(UnknownReason r);

struct UnknownDetail {
    UnknownReason reason;
    std::string detail;
    std::optional<std::size_t> path;
};

struct PathSummary {
    std::size_t index = 0;
    std::vector<std::string> pc;
    std::vector<bool> decisions;
    OutcomeKind outcome = OutcomeKind::Normal;
    std::uint64_t gas_used = 0;
    std::string status;  // holds / violated / unknown / gas-exhausted / fault
    std::string note;
};

struct Counterexample {
    std::size_t path = 0;
    Assignment model;
    std::vector<std::string> trace;  // branch decisions with spans
    OutcomeKind replay_outcome = OutcomeKind::Normal;
    std::vector<std::string> violated;  // clauses false on replay
    std::string final_memory;
    bool replay_confirmed = false;
};

struct Verdict {
    std::string property;
    std::string entry;
    VerdictKind kind = VerdictKind::Unknown;
    std::vector<UnknownDetail> unknowns;
    std::optional<Counterexample> counterexample;
    std::vector<PathSummary> paths;
    std::uint64_t gas_limit = 0;
    std::size_t pruned = 0;
    /// Unknown constraint sets, for SMT-LIB export: (path index, constraints).
    std::vector<std::pair<std::size_t, std::vector<Constraint>>> open_queries;
};

Verdict verify(const Contract& c, const PropertySpec& spec, const VerifyOptions& opts = {});

/// Replays a model concretely and reports which clauses fail (empty when the
/// property holds on that input).
struct Replay {
    ExecOutcome outcome;
    std::vector<std::string> violated;
};
Replay replay(const Contract& c, const BoundSpec& spec, const Assignment& model, const VerifyOptions& opts = {});

// ---------------------------------------------------------------- reports

nlohmann::json verdict_to_json(const Verdict& v);
nlohmann::json report_json(const std::string& file, const std::vector<Verdict>& verdicts);
std::string report_text(const std::vector<Verdict>& verdicts);

// ---------------------------------------------------------------- differential harness

struct DiffOptions {
    std::uint64_t gas_limit = 20000;
    std::size_t mem_size = kDefaultMemSize;
    unsigned max_call_depth = 64;
    SymbolicBinopHook symbolic_binop_hook;  // mutation under test
};

struct Divergence {
    std::size_t case_index = 0;
    std::uint64_t seed = 0;
    std::string function;
    std::string details;
};

struct DiffReport {
    std::string contract;
    std::string entry;
    std::size_t cases = 0;
    std::vector<Divergence> divergences;
    std::map<std::string, std::size_t> outcomes;  // concrete outcome kind -> count
    std::map<std::string, std::size_t> faults;    // concrete fault kind -> count
};

/// Runs `entry` on n random concrete inputs in both modes and compares
/// outcome kind, returns, gas and memory.
DiffReport diff_check(const Contract& c, const std::string& entry, std::size_t n_cases, std::uint64_t seed,
                      const DiffOptions& opts = {});

nlohmann::json diff_to_json(const DiffReport& r);

}  // namespace fspvm
