#pragma once

// Lolisa: the untyped parse tree produced by the frontends, the typed core
// AST, and the typechecker that is the only way to get from one to the other.

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fspvm/domain.hpp"
#include "fspvm/memory.hpp"

namespace fspvm {

struct SourceSpan {
    std::string file;
    int line = 0;
    int col = 0;
    int end_line = 0;
    int end_col = 0;

    /// `file:line:col`
    std::string str() const;
};

// ---------------------------------------------------------------- untyped

/// Surface type syntax: an elementary/struct name, a mapping, a function
/// type, or an already resolved type (dump files spell types out exactly).
struct UType {
    enum class Kind { Name, Mapping, Function, Resolved } kind = Kind::Name;
    std::string name;
    std::vector<UType> kids;  // mapping key/value, function parameters
    std::vector<UType> rets;  // function results
    std::optional<LType> resolved;
    SourceSpan span;

    static UType named(std::string n, SourceSpan s = {});
    static UType mapping(UType k, UType v, SourceSpan s = {});
    static UType function(std::vector<UType> params, std::vector<UType> rets, SourceSpan s = {});
    static UType of(LType t, SourceSpan s = {});
};

enum class UExprKind { IntLit, BoolLit, StringLit, HexLit, Var, Binary, Unary, Index, Member, Call, Old, Const };

struct UExpr;
using UExprPtr = std::shared_ptr<const UExpr>;

struct UExpr {
    UExprKind kind = UExprKind::IntLit;
    SourceSpan span;
    std::string text;  // literal digits, identifier, member or callee name
    bool bool_value = false;
    BinOp bop = BinOp::Add;
    UnOp uop = UnOp::Not;
    std::vector<UExprPtr> args;
    std::optional<Value> constant;  // Const
    std::optional<LType> annot;     // type annotation carried by dump-format variables

    static UExprPtr int_lit(std::string digits, SourceSpan s = {});
    static UExprPtr bool_lit(bool b, SourceSpan s = {});
    static UExprPtr string_lit(std::string text, SourceSpan s = {});
    static UExprPtr hex_lit(std::string digits, SourceSpan s = {});
    static UExprPtr var(std::string name, SourceSpan s = {}, std::optional<LType> annot = std::nullopt);
    static UExprPtr binary(BinOp op, UExprPtr a, UExprPtr b, SourceSpan s = {});
    static UExprPtr unary(UnOp op, UExprPtr a, SourceSpan s = {});
    static UExprPtr index(UExprPtr base, UExprPtr key, SourceSpan s = {});
    static UExprPtr member(UExprPtr base, std::string field, SourceSpan s = {});
    static UExprPtr call(std::string callee, std::vector<UExprPtr> args, SourceSpan s = {});
    static UExprPtr old(UExprPtr inner, SourceSpan s = {});
    static UExprPtr constant_of(Value v, SourceSpan s = {});
};

enum class StmtKind { Var, Assignv, If, While, For, Throw, Snil, Return, CallStmt, Placeholder };

struct UStmt;
using UStmtPtr = std::shared_ptr<const UStmt>;
using UStmtList = std::vector<UStmtPtr>;

struct UStmt {
    StmtKind kind = StmtKind::Snil;
    SourceSpan span;
    std::optional<Visibility> vis;  // Var
    std::string name;               // Var
    UType type;                     // Var
    UExprPtr e1;                    // Var init, Assignv lhs, If/While/For cond, CallStmt call
    UExprPtr e2;                    // Assignv rhs
    std::vector<UExprPtr> exprs;    // Return
    UStmtList body;                 // If then, While/For body
    UStmtList else_body;            // If else
    UStmtList init;                 // For
    UStmtList step;                 // For
};

struct UParam {
    std::string name;
    UType type;
    SourceSpan span;
};

struct UStructDef {
    std::string name;
    std::vector<UParam> fields;
    SourceSpan span;
};

struct UModifierDef {
    std::string name;
    std::vector<UParam> params;
    UStmtList body;
    SourceSpan span;
};

struct UModifierUse {
    std::string name;
    std::vector<UExprPtr> args;
    SourceSpan span;
};

struct UFunctionDef {
    std::string name;
    std::optional<Visibility> vis;
    std::vector<UParam> params;
    std::vector<UType> rets;
    std::vector<UModifierUse> modifiers;
    UStmtList body;
    SourceSpan span;
};

struct UContract {
    std::string name;
    std::vector<UStructDef> structs;
    UStmtList state;  // Var statements
    std::vector<UModifierDef> modifiers;
    std::vector<UFunctionDef> functions;
    SourceSpan span;
};

// ---------------------------------------------------------------- typed

enum class ExprKind { Const, Var, Bop, Uop, Map, Field, Call, Old };
enum class VarScope { Local, State, Builtin };

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Well-typed expression. Instances come only from the typechecker (and the
/// modifier expander), so every ExprPtr downstream is well-typed.
class Expr {
public:
    ExprKind kind() const { return kind_; }
    const LType& type() const { return type_; }
    const SourceSpan& span() const { return span_; }
    const Value& value() const { return value_; }             // Const
    const std::string& name() const { return name_; }         // Var, Field, Call
    VarScope scope() const { return scope_; }                 // Var
    BinOp binop() const { return bop_; }                      // Bop
    UnOp unop() const { return uop_; }                        // Uop
    const std::vector<ExprPtr>& args() const { return args_; }
    const ExprPtr& arg(std::size_t i) const { return args_[i]; }
    /// Call: callee is a Tfun-typed variable rather than a function name.
    bool indirect() const { return indirect_; }
    const std::vector<LType>& ret_types() const { return rets_; }  // Call

private:
    Expr() = default;
    friend class ExprBuilder;

    ExprKind kind_ = ExprKind::Const;
    LType type_;
    SourceSpan span_;
    Value value_;
    std::string name_;
    VarScope scope_ = VarScope::Local;
    BinOp bop_ = BinOp::Add;
    UnOp uop_ = UnOp::Not;
    std::vector<ExprPtr> args_;
    bool indirect_ = false;
    std::vector<LType> rets_;
};

class Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;
using StmtList = std::vector<StmtPtr>;

class Stmt {
public:
    StmtKind kind() const { return kind_; }
    const SourceSpan& span() const { return span_; }
    const std::optional<Visibility>& vis() const { return vis_; }  // Var
    const std::string& name() const { return name_; }              // Var
    const LType& type() const { return type_; }                    // Var
    const ExprPtr& init_expr() const { return e1_; }               // Var (may be null)
    const ExprPtr& lhs() const { return e1_; }                     // Assignv
    const ExprPtr& rhs() const { return e2_; }                     // Assignv
    const ExprPtr& cond() const { return e1_; }                    // If, While, For
    const ExprPtr& call() const { return e1_; }                    // CallStmt
    const std::vector<ExprPtr>& exprs() const { return exprs_; }   // Return
    const StmtList& body() const { return body_; }                 // If then, loops
    const StmtList& else_body() const { return else_body_; }       // If
    const StmtList& init() const { return init_; }                 // For
    const StmtList& step() const { return step_; }                 // For

private:
    Stmt() = default;
    friend class StmtBuilder;

    StmtKind kind_ = StmtKind::Snil;
    SourceSpan span_;
    std::optional<Visibility> vis_;
    std::string name_;
    LType type_;
    ExprPtr e1_;
    ExprPtr e2_;
    std::vector<ExprPtr> exprs_;
    StmtList body_;
    StmtList else_body_;
    StmtList init_;
    StmtList step_;
};

struct Param {
    std::string name;
    LType type;
};

struct ModifierUse {
    std::string name;
    std::vector<ExprPtr> args;
};

class FunctionDef {
public:
    const std::string& name() const { return name_; }
    const std::optional<Visibility>& vis() const { return vis_; }
    const std::vector<Param>& params() const { return params_; }
    const std::vector<LType>& rets() const { return rets_; }
    const std::vector<ModifierUse>& modifiers() const { return modifiers_; }
    const StmtList& body() const { return body_; }
    const SourceSpan& span() const { return span_; }
    LType fun_type() const;

private:
    FunctionDef() = default;
    friend class ContractBuilder;

    std::string name_;
    std::optional<Visibility> vis_;
    std::vector<Param> params_;
    std::vector<LType> rets_;
    std::vector<ModifierUse> modifiers_;
    StmtList body_;
    SourceSpan span_;
};

class ModifierDef {
public:
    const std::string& name() const { return name_; }
    const std::vector<Param>& params() const { return params_; }
    const StmtList& body() const { return body_; }
    const SourceSpan& span() const { return span_; }

private:
    ModifierDef() = default;
    friend class ContractBuilder;

    std::string name_;
    std::vector<Param> params_;
    StmtList body_;
    SourceSpan span_;
};

class Contract {
public:
    const std::string& name() const { return name_; }
    /// Struct names in declaration order; fields in `structs()`.
    const std::vector<std::string>& struct_order() const { return struct_order_; }
    const StructTable& structs() const { return structs_; }
    const StmtList& state() const { return state_; }
    const std::vector<ModifierDef>& modifiers() const { return modifiers_; }
    const std::vector<FunctionDef>& functions() const { return functions_; }
    /// Unsigned width that surface `uint` denoted when this contract was checked.
    int uint_width() const { return uint_width_; }

    const FunctionDef* find_function(const std::string& name) const;
    const ModifierDef* find_modifier(const std::string& name) const;

private:
    Contract() = default;
    friend class ContractBuilder;

    std::string name_;
    std::vector<std::string> struct_order_;
    StructTable structs_;
    StmtList state_;
    std::vector<ModifierDef> modifiers_;
    std::vector<FunctionDef> functions_;
    int uint_width_ = 256;
};

// ---------------------------------------------------------------- typechecking

enum class TypeErrorKind {
    UnboundIdentifier,
    TypeMismatch,
    BadOperand,
    ArityMismatch,
    NotAnLValue,
    ReturnOutsideFunction,
    DuplicateDeclaration,
    UnknownModifier,
    MissingPlaceholder,
    MisplacedPlaceholder,
    UnknownType,
};

std::string_view type_error_name(TypeErrorKind k);

struct TypeError {
    TypeErrorKind kind;
    std::string message;
    SourceSpan span;

    /// `file:line:col: TypeMismatch: message`
    std::string str() const;
};

class TypeErrors : public std::runtime_error {
public:
    explicit TypeErrors(std::vector<TypeError> errors);
    const std::vector<TypeError>& errors() const { return errors_; }
    TypeErrorKind first_kind() const { return errors_.front().kind; }

private:
    std::vector<TypeError> errors_;
};

struct TypeOptions {
    int uint_width = 256;  // width of surface `uint`/`int`
};

struct FunctionSig {
    std::vector<LType> params;
    std::vector<LType> rets;
};

/// Scoped identifier -> type map plus the contract-level tables (Gamma).
class TypeContext {
public:
    explicit TypeContext(TypeOptions opts = {});
    /// Context at function-body level for a checked contract: state variables,
    /// function signatures and structs.
    static TypeContext for_contract(const Contract& c);

    const TypeOptions& options() const { return opts_; }
    const StructTable& structs() const { return structs_; }

    std::optional<LType> lookup_var(const std::string& name, VarScope* scope = nullptr) const;
    const FunctionSig* lookup_function(const std::string& name) const;

    /// Declares in the innermost scope; DuplicateDeclaration if already there.
    TypeContext with_var(const std::string& name, const LType& t, const SourceSpan& span = {}) const;
    TypeContext push_scope() const;
    TypeContext with_old(bool allowed) const;
    bool old_allowed() const { return allow_old_; }

    LType resolve_type(const UType& t) const;

private:
    friend class Typechecker;
    friend Contract typecheck_contract(const UContract& c, const TypeOptions& opts);

    TypeOptions opts_;
    StructTable structs_;
    std::map<std::string, LType> state_;
    std::map<std::string, FunctionSig> functions_;
    std::vector<std::map<std::string, LType>> scopes_;
    std::optional<std::vector<LType>> rets_;  // inside a function body
    bool in_modifier_ = false;
    bool allow_old_ = false;
};

/// Types `e`; `expected` guides literal typing and is enforced when given.
ExprPtr typecheck_expr(const TypeContext& ctx, const UExpr& e, const std::optional<LType>& expected = std::nullopt);
std::pair<StmtPtr, TypeContext> typecheck_stmt(const TypeContext& ctx, const UStmt& s);
/// Throws TypeErrors with every error found.
Contract typecheck_contract(const UContract& c, const TypeOptions& opts = {});

UExprPtr erase(const Expr& e);
UStmtPtr erase(const Stmt& s);
UContract erase(const Contract& c);

/// Function body with its modifiers spliced in at their placeholders,
/// outermost modifier first. Modifier parameters become locals.
StmtList expand_modifiers(const Contract& c, const FunctionDef& f);

/// Structural equality of typed trees (spans ignored).
bool same_tree(const Expr& a, const Expr& b);
bool same_tree(const Stmt& a, const Stmt& b);
bool same_tree(const Contract& a, const Contract& b);

}  // namespace fspvm
