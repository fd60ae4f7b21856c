#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "fspvm/frontend.hpp"
#include "fspvm/lolisa.hpp"

using namespace fspvm;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string corpus(const std::string& name) { return read_file(std::string(FSPVM_CORPUS_DIR) + "/" + name); }

TypeErrorKind first_error(const std::string& src, int width = 256) {
    try {
        typecheck_contract(parse_solidity(src), TypeOptions{width});
    } catch (const TypeErrors& e) {
        return e.first_kind();
    }
    ADD_FAILURE() << "contract typechecked";
    return TypeErrorKind::UnknownType;
}

template <class F>
TypeErrorKind error_of(F&& f) {
    try {
        f();
    } catch (const TypeErrors& e) {
        return e.first_kind();
    }
    ADD_FAILURE() << "no type error";
    return TypeErrorKind::UnknownType;
}

const LType kU64 = LType::uint(64);

}  // namespace

TEST(TypecheckExpr, NowLessThanOpen) {
    TypeContext ctx = TypeContext(TypeOptions{64}).with_var("open", kU64);
    ExprPtr e = typecheck_expr(ctx, *parse_expression("now < open"));
    EXPECT_EQ(e->kind(), ExprKind::Bop);
    EXPECT_EQ(e->binop(), BinOp::Lt);
    EXPECT_EQ(e->type(), LType::boolean());
    EXPECT_EQ(e->arg(0)->type(), kU64);
    EXPECT_EQ(e->arg(0)->scope(), VarScope::Builtin);
}

TEST(TypecheckExpr, BoolPlusLiteral) {
    EXPECT_EQ(error_of([] { typecheck_expr(TypeContext(), *parse_expression("true + 1")); }),
              TypeErrorKind::BadOperand);
}

TEST(TypecheckExpr, MappingSelect) {
    TypeContext ctx = TypeContext()
                          .with_var("balances", LType::mapping(LType::address(), LType::uint(256)))
                          .with_var("msg_sender", LType::address());
    ExprPtr e = typecheck_expr(ctx, *parse_expression("balances[msg_sender]"));
    EXPECT_EQ(e->kind(), ExprKind::Map);
    EXPECT_EQ(e->type(), LType::uint(256));
}

TEST(TypecheckExpr, LiteralsFollowContext) {
    TypeContext ctx = TypeContext().with_var("x", LType::uint(8)).with_var("y", LType::sint(8));
    EXPECT_EQ(typecheck_expr(ctx, *parse_expression("x + 1"))->type(), LType::uint(8));
    EXPECT_EQ(typecheck_expr(ctx, *parse_expression("1 + x"))->type(), LType::uint(8));
    EXPECT_EQ(typecheck_expr(ctx, *parse_expression("y < -128"))->arg(1)->value(), Value::integer(8, Signedness::Signed, -128));
    EXPECT_EQ(error_of([&] { typecheck_expr(ctx, *parse_expression("x + 256")); }), TypeErrorKind::TypeMismatch);
    EXPECT_EQ(error_of([&] { typecheck_expr(ctx, *parse_expression("x + y")); }), TypeErrorKind::BadOperand);
    EXPECT_EQ(error_of([&] { typecheck_expr(ctx, *parse_expression("z")); }), TypeErrorKind::UnboundIdentifier);
}

TEST(TypecheckExpr, OldOnlyInSpecifications) {
    TypeContext ctx = TypeContext().with_var("x", kU64);
    EXPECT_EQ(error_of([&] { typecheck_expr(ctx, *parse_expression("old(x) == x")); }),
              TypeErrorKind::UnboundIdentifier);
    ExprPtr e = typecheck_expr(ctx.with_old(true), *parse_expression("old(x) == x"));
    EXPECT_EQ(e->arg(0)->kind(), ExprKind::Old);
}

TEST(TypecheckStmt, VarExtendsContext) {
    auto [s, ctx] = typecheck_stmt(TypeContext(TypeOptions{64}), *parse_solidity("contract C { uint public close; }").state[0]);
    EXPECT_EQ(s->kind(), StmtKind::Var);
    EXPECT_EQ(*s->vis(), Visibility::Public);
    EXPECT_EQ(ctx.lookup_var("close"), kU64);
}

TEST(TypecheckStmt, AssignAndLValues) {
    TypeContext ctx = TypeContext(TypeOptions{64}).with_var("close", kU64).with_var("privilegeClose", kU64);
    UContract u = parse_solidity("contract C { function f() { close = privilegeClose; 5 = close; msg.sender = close; } }");
    const UStmtList& body = u.functions[0].body;
    auto [s, ctx2] = typecheck_stmt(ctx, *body[0]);
    EXPECT_EQ(s->kind(), StmtKind::Assignv);
    EXPECT_EQ(s->rhs()->type(), kU64);
    EXPECT_EQ(error_of([&, &ctx = ctx] { typecheck_stmt(ctx, *body[1]); }), TypeErrorKind::NotAnLValue);
    EXPECT_EQ(error_of([&, &ctx = ctx] { typecheck_stmt(ctx, *body[2]); }), TypeErrorKind::NotAnLValue);
}

TEST(TypecheckStmt, ConditionsMustBeBool) {
    EXPECT_EQ(first_error("contract C { function f(uint x) { if (x) { throw; } } }"), TypeErrorKind::TypeMismatch);
    EXPECT_EQ(first_error("contract C { function f(uint x) { while (x + 1) { } } }"), TypeErrorKind::TypeMismatch);
}

TEST(TypecheckContract, MinimalIdentity) {
    Contract c = typecheck_contract(
        parse_solidity("contract C { uint public n; function id(uint x) public returns (uint) { return x; } }"));
    ASSERT_EQ(c.functions().size(), 1u);
    EXPECT_EQ(c.functions()[0].rets(), std::vector<LType>{LType::uint(256)});
    EXPECT_EQ(c.state().size(), 1u);
}

TEST(TypecheckContract, Errors) {
    EXPECT_EQ(first_error("contract C { function f() public nope { } }"), TypeErrorKind::UnknownModifier);
    EXPECT_EQ(first_error("contract C { modifier m() { throw; } function f() m { } }"),
              TypeErrorKind::MissingPlaceholder);
    EXPECT_EQ(first_error("contract C { modifier m() { _; _; } }"), TypeErrorKind::MisplacedPlaceholder);
    EXPECT_EQ(first_error("contract C { function f() { _; } }"), TypeErrorKind::MisplacedPlaceholder);
    EXPECT_EQ(first_error("contract C { modifier m() { _; return; } }"), TypeErrorKind::ReturnOutsideFunction);
    EXPECT_EQ(first_error("contract C { function f() returns (uint) { return; } }"), TypeErrorKind::ArityMismatch);
    EXPECT_EQ(first_error("contract C { function f(uint x) { g(x, x); } function g(uint y) { } }"),
              TypeErrorKind::ArityMismatch);
    EXPECT_EQ(first_error("contract C { uint a; bool a; }"), TypeErrorKind::DuplicateDeclaration);
    EXPECT_EQ(first_error("contract C { function f() { uint a; uint a; } }"), TypeErrorKind::DuplicateDeclaration);
    EXPECT_EQ(first_error("contract C { function f() { uint now; } }"), TypeErrorKind::DuplicateDeclaration);
    EXPECT_EQ(first_error("contract C { Foo x; }"), TypeErrorKind::UnknownType);
    EXPECT_EQ(first_error("contract C { uint24 x; }"), TypeErrorKind::UnknownType);
    EXPECT_EQ(first_error("contract C { struct S { uint a; S inner; } }"), TypeErrorKind::UnknownType);
}

TEST(TypecheckContract, AggregatesErrors) {
    try {
        typecheck_contract(parse_solidity("contract C { function f() { x = 1; } function g() { return 1; } }"));
        FAIL();
    } catch (const TypeErrors& e) {
        ASSERT_EQ(e.errors().size(), 2u);
        EXPECT_EQ(e.errors()[0].kind, TypeErrorKind::UnboundIdentifier);
        EXPECT_EQ(e.errors()[1].kind, TypeErrorKind::ArityMismatch);
        EXPECT_EQ(e.errors()[0].span.line, 1);
    }
}

TEST(TypecheckContract, ShadowingAndScopes) {
    Contract c = typecheck_contract(parse_solidity(R"(contract C {
        uint x;
        function f(bool x) returns (bool) {
            if (x) { uint8 x = 3; x = x + 1; }
            return x;
        }
        function g() returns (uint) { return x; }
    })"));
    EXPECT_EQ(c.find_function("f")->body()[1]->exprs()[0]->type(), LType::boolean());
    EXPECT_EQ(c.find_function("g")->body()[0]->exprs()[0]->scope(), VarScope::State);
    EXPECT_EQ(first_error("contract C { function f() { if (true) { uint y; } y = 1; } }"),
              TypeErrorKind::UnboundIdentifier);
}

TEST(TypecheckContract, RecursionAndFunctionPointers) {
    Contract c = typecheck_contract(parse_solidity(corpus("pathological.sol")));
    const FunctionDef* apply = c.find_function("apply");
    ASSERT_NE(apply, nullptr);
    const Stmt& decl = *apply->body()[0];
    EXPECT_TRUE(decl.type().is_fun());
    EXPECT_EQ(decl.init_expr()->value().kind(), ValueKind::FunPtr);
    const Expr& call = *apply->body()[1]->exprs()[0];
    EXPECT_TRUE(call.indirect());
    EXPECT_EQ(first_error("contract C { function f() { function (uint) returns (uint) g; } }"),
              TypeErrorKind::TypeMismatch);
}

TEST(TypecheckContract, CorpusAccepted) {
    for (const char* f : {"erc20.sol", "erc20_broken.sol", "sponsor.sol", "pathological.sol"}) {
        EXPECT_NO_THROW(typecheck_contract(parse_solidity(corpus(f), f))) << f;
    }
    EXPECT_NO_THROW(typecheck_contract(parse_solidity(corpus("figure5.sol")), TypeOptions{64}));
}

TEST(TypecheckContract, Deterministic) {
    UContract u = parse_solidity(corpus("erc20.sol"));
    EXPECT_EQ(pretty_print(typecheck_contract(u)), pretty_print(typecheck_contract(u)));
}

TEST(Erase, RoundTripOnCorpus) {
    for (const char* f : {"erc20.sol", "sponsor.sol", "pathological.sol"}) {
        Contract c = typecheck_contract(parse_solidity(corpus(f)));
        Contract back = typecheck_contract(erase(c), TypeOptions{c.uint_width()});
        EXPECT_TRUE(same_tree(c, back)) << f;
    }
}

TEST(Erase, DropsOnlyAnnotations) {
    TypeContext ctx = TypeContext(TypeOptions{64}).with_var("open", kU64);
    ExprPtr e = typecheck_expr(ctx, *parse_expression("now < open"));
    UExprPtr u = erase(*e);
    EXPECT_EQ(u->kind, UExprKind::Binary);
    EXPECT_EQ(u->bop, BinOp::Lt);
    EXPECT_EQ(u->args[0]->text, "now");
    EXPECT_EQ(u->args[1]->text, "open");
    EXPECT_FALSE(u->args[1]->annot);
    EXPECT_TRUE(same_tree(*typecheck_expr(ctx, *u), *e));
}

TEST(ExpandModifiers, SplicesAtPlaceholder) {
    Contract c = typecheck_contract(parse_solidity(R"(contract C {
        address owner;
        uint n;
        modifier onlyOwner() { require(msg.sender == owner); _; }
        modifier atLeast(uint k) { uint seen = k; if (n < seen) { throw; } _; n = n + 1; }
        function f(uint k) onlyOwner atLeast(k + 1) returns (uint) { return k; }
    })"));
    StmtList body = expand_modifiers(c, *c.find_function("f"));
    ASSERT_EQ(body.size(), 6u);
    EXPECT_EQ(body[0]->kind(), StmtKind::If);       // require from onlyOwner
    EXPECT_EQ(body[1]->kind(), StmtKind::Var);      // atLeast parameter
    EXPECT_EQ(body[1]->name(), "atLeast#1.k");
    EXPECT_EQ(body[1]->init_expr()->arg(0)->name(), "k");
    EXPECT_EQ(body[2]->name(), "atLeast#1.seen");
    EXPECT_EQ(body[2]->init_expr()->name(), "atLeast#1.k");
    EXPECT_EQ(body[3]->kind(), StmtKind::If);
    EXPECT_EQ(body[4]->kind(), StmtKind::Return);   // function body spliced before the tail
    EXPECT_EQ(body[5]->kind(), StmtKind::Assignv);
}
