#pragma once

// Static types, concrete values and symbolic expressions shared by every
// layer of the machine: memory blocks hold SymExprs, the interpreter
// produces them, and the verifier's solver evaluates them.

#include <atomic>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace fspvm {

/// Raw two's-complement bit pattern of an integer value (any width <= 256).
using Bits256 = boost::multiprecision::uint256_t;
/// Mathematical integer, used at API boundaries and for signed arithmetic.
using BigInt = boost::multiprecision::cpp_int;

enum class Signedness { Signed, Unsigned };

enum class TypeKind { Int, Bool, Address, String, Bytes, Mapping, Struct, Fun, Unit };

bool is_valid_int_width(int width);

class LType {
public:
    LType();  // Tunit

    static LType integer(int width, Signedness signedness);
    static LType uint(int width) { return integer(width, Signedness::Unsigned); }
    static LType sint(int width) { return integer(width, Signedness::Signed); }
    static LType boolean();
    static LType address();
    static LType string();
    static LType bytes(int n);
    static LType mapping(LType key, LType value);
    static LType structure(std::string name);
    static LType function(std::vector<LType> params, std::vector<LType> rets);
    static LType unit();

    TypeKind kind() const;
    bool is_int() const { return kind() == TypeKind::Int; }
    bool is_bool() const { return kind() == TypeKind::Bool; }
    bool is_mapping() const { return kind() == TypeKind::Mapping; }
    bool is_struct() const { return kind() == TypeKind::Struct; }
    bool is_fun() const { return kind() == TypeKind::Fun; }
    /// Int, Bool, Address, String or Bytes: the kinds with equality.
    bool is_scalar() const;

    int width() const;
    Signedness signedness() const;
    bool is_signed() const { return is_int() && signedness() == Signedness::Signed; }
    int bytes_len() const;
    const LType& key() const;
    const LType& value() const;
    const std::string& struct_name() const;
    const std::vector<LType>& params() const;
    const std::vector<LType>& rets() const;

    /// Solidity-like rendering: `uint8`, `mapping(address => uint8)`, `struct S`.
    std::string str() const;

    friend bool operator==(const LType& a, const LType& b);
    friend std::strong_ordering operator<=>(const LType& a, const LType& b);

    struct Rep;  // implementation detail

private:
    explicit LType(std::shared_ptr<const Rep> rep);
    std::shared_ptr<const Rep> rep_;
};

/// Field tables of the structs declared by a contract.
using StructTable = std::map<std::string, std::vector<std::pair<std::string, LType>>>;

enum class ValueKind { Int, Bool, Address, String, Bytes, Map, Struct, FunPtr, Unit, InitData };

enum class DomainErrorKind { NoDefault, DivByZero, MissingAssignment, IllTyped, UnknownStruct };

class DomainError : public std::runtime_error {
public:
    DomainError(DomainErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    DomainErrorKind kind() const { return kind_; }

private:
    DomainErrorKind kind_;
};

class Value;

struct MapData;
struct StructData;

class Value {
public:
    Value();  // initData

    static Value integer(int width, Signedness s, const BigInt& n);
    static Value from_bits(int width, Signedness s, const Bits256& bits);
    static Value uint(int width, const BigInt& n) { return integer(width, Signedness::Unsigned, n); }
    static Value boolean(bool b);
    static Value address(const Bits256& bits);
    static Value string(std::string text);
    static Value bytes(std::vector<std::uint8_t> octets);
    static Value map(LType key_type, LType value_type, Value fallback, std::map<Value, Value> entries = {});
    static Value structure(std::string name, std::vector<std::pair<std::string, Value>> fields);
    static Value funptr(std::string name, LType fun_type);
    static Value unit();
    static Value init_data();

    ValueKind kind() const;
    bool is_init_data() const { return kind() == ValueKind::InitData; }

    int int_width() const;
    Signedness int_signedness() const;
    const Bits256& int_bits() const;
    /// Signed or unsigned mathematical value of an Int.
    BigInt int_value() const;
    bool as_bool() const;
    const Bits256& address_bits() const;
    const std::string& as_string() const;
    const std::vector<std::uint8_t>& as_bytes() const;
    const MapData& as_map() const;
    const StructData& as_struct() const;
    const std::string& funptr_name() const;

    /// Static type; throws DomainError(IllTyped) for initData, which has none.
    LType type() const;

    Value map_get(const Value& key) const;
    Value map_set(const Value& key, const Value& v) const;
    Value field(const std::string& name) const;
    Value with_field(const std::string& name, const Value& v) const;

    /// Report rendering: `uint64(5)`, `true`, `addr(0x..01)`, `map{default=.., [k]=v}`, `initData`.
    std::string render() const;

    friend bool operator==(const Value& a, const Value& b) { return compare(a, b) == 0; }
    friend bool operator<(const Value& a, const Value& b) { return compare(a, b) < 0; }
    static int compare(const Value& a, const Value& b);

private:
    struct IntV {
        std::uint16_t width;
        Signedness sign;
        Bits256 bits;
    };
    struct AddrV {
        Bits256 bits;
    };
    struct StrV {
        std::string text;
    };
    struct BytesV {
        std::vector<std::uint8_t> octets;
    };
    struct FunV {
        std::string name;
        LType type;
    };
    struct UnitV {};
    struct InitV {};
    using Rep = std::variant<IntV, bool, AddrV, StrV, BytesV, std::shared_ptr<const MapData>,
                             std::shared_ptr<const StructData>, FunV, UnitV, InitV>;
    explicit Value(Rep rep) : rep_(std::move(rep)) {}
    Rep rep_;
};

struct MapData {
    LType key_type;
    LType value_type;
    std::shared_ptr<const Value> fallback;
    // Entries equal to the default are never stored, so structural equality
    // of MapData is semantic equality.
    std::map<Value, Value> entries;
};

struct StructData {
    std::string name;
    std::vector<std::pair<std::string, Value>> fields;
};

Bits256 width_mask(int width);

/// Wraps n into the representable range of the given integer type (two's complement).
Value int_wrap(int width, Signedness s, const BigInt& n);

/// Zero element of t; NoDefault for function types.
Value default_value(const LType& t, const StructTable& structs = {});

enum class BinOp { Add, Sub, Mul, Div, Mod, Lt, Le, Gt, Ge, Eq, Ne, And, Or };
enum class UnOp { Not, Neg };

std::string_view binop_symbol(BinOp op);
std::string_view unop_symbol(UnOp op);
bool is_arith(BinOp op);
bool is_comparison(BinOp op);
bool is_logical(BinOp op);

/// Result type of `a op b`; throws DomainError(IllTyped) on a signature violation.
LType binop_result_type(BinOp op, const LType& a, const LType& b);
LType unop_result_type(UnOp op, const LType& a);

/// Concrete operator semantics. Div/Mod by zero raise DivByZero.
Value apply_binop(BinOp op, const Value& a, const Value& b);
Value apply_unop(UnOp op, const Value& a);

enum class SymKind { Concrete, Var, App, MapSelect, FieldSel, Ite, MapStore, FieldStore };

struct SymNode;

class SymExpr {
public:
    SymExpr();  // Concrete(initData)

    static SymExpr concrete(Value v);
    static SymExpr var(std::string name, LType type);
    static SymExpr binary(BinOp op, SymExpr a, SymExpr b);
    static SymExpr unary(UnOp op, SymExpr a);
    static SymExpr select(SymExpr map, SymExpr key);
    static SymExpr field(SymExpr base, std::string field, LType type);
    static SymExpr ite(SymExpr cond, SymExpr then_e, SymExpr else_e);
    static SymExpr store(SymExpr map, SymExpr key, SymExpr value);
    static SymExpr field_store(SymExpr base, std::string field, SymExpr value);

    SymKind kind() const;
    const LType& type() const;
    bool is_concrete() const { return kind() == SymKind::Concrete; }
    bool is_init_data() const;
    const Value& value() const;
    /// Variable name (Var) or field name (FieldSel / FieldStore).
    const std::string& name() const;
    bool is_unary() const;
    BinOp binop() const;
    UnOp unop() const;
    const std::vector<SymExpr>& args() const;
    const SymExpr& arg(std::size_t i) const { return args()[i]; }

    std::size_t node_count() const;
    bool has_vars() const;
    bool partial() const;
    std::string render() const;

    /// Structural identity, with a pointer-equality fast path.
    friend bool operator==(const SymExpr& a, const SymExpr& b);
    /// Deterministic structural order, used to canonicalize sums.
    static int compare(const SymExpr& a, const SymExpr& b);

    const SymNode* node() const { return node_.get(); }

private:
    explicit SymExpr(std::shared_ptr<const SymNode> n) : node_(std::move(n)) {}
    std::shared_ptr<const SymNode> node_;
};

struct SymNode {
    SymKind kind;
    LType type;
    Value value;
    std::string name;
    bool unary = false;
    BinOp bop = BinOp::Add;
    UnOp uop = UnOp::Not;
    std::vector<SymExpr> args;
    std::size_t count = 1;
    bool has_vars = false;
    // Contains a Div/Mod whose divisor is not a non-zero constant, so
    // evaluation may fault; rewrites that drop subterms must respect this.
    bool partial = false;
    // Set on simplify results so already-normal subtrees are not revisited.
    mutable std::atomic<bool> normal{false};
};

/// A Tbool expression asserted true; a path condition is an ordered list of them.
struct Constraint {
    SymExpr expr;
    std::string origin;  // branch or clause description, for traces
};

/// Constant folding plus algebraic normalization. Semantics- and type-preserving.
SymExpr simplify(const SymExpr& e);

/// Replaces variables by the given expressions (not simplified).
SymExpr substitute(const SymExpr& e, const std::map<std::string, SymExpr>& bindings);

/// All variables of e (name -> type), in name order.
std::map<std::string, LType> free_vars(const SymExpr& e);

using Assignment = std::map<std::string, Value>;

/// Substitutes the assignment and folds to a single value.
Value eval_closed(const SymExpr& e, const Assignment& assignment);

// Partial evaluation over a possibly incomplete assignment, used by the
// solver. Evaluation is short-circuiting for And/Or/Ite.
struct PartialLookup {
    virtual ~PartialLookup() = default;
    virtual const Value* lookup(const std::string& name) const = 0;
};

struct Blocked {
    std::string first_unknown;
};

using PartialResult = std::variant<Value, Blocked>;

PartialResult eval_partial(const SymExpr& e, const PartialLookup& lookup);

}  // namespace fspvm
