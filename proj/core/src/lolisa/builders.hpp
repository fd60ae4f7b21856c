#pragma once

// Construction of typed nodes. Private to the library: only the typechecker
// and the modifier expander may create Expr/Stmt values.

#include "fspvm/lolisa.hpp"

namespace fspvm {

class ExprBuilder {
public:
    static ExprPtr constant(Value v, SourceSpan span) {
        auto e = make(ExprKind::Const, v.type(), std::move(span));
        e->value_ = std::move(v);
        return e;
    }
    static ExprPtr var(std::string name, LType t, VarScope scope, SourceSpan span) {
        auto e = make(ExprKind::Var, std::move(t), std::move(span));
        e->name_ = std::move(name);
        e->scope_ = scope;
        return e;
    }
    static ExprPtr bop(BinOp op, ExprPtr a, ExprPtr b, LType t, SourceSpan span) {
        auto e = make(ExprKind::Bop, std::move(t), std::move(span));
        e->bop_ = op;
        e->args_ = {std::move(a), std::move(b)};
        return e;
    }
    static ExprPtr uop(UnOp op, ExprPtr a, LType t, SourceSpan span) {
        auto e = make(ExprKind::Uop, std::move(t), std::move(span));
        e->uop_ = op;
        e->args_ = {std::move(a)};
        return e;
    }
    static ExprPtr map(ExprPtr base, ExprPtr key, LType t, SourceSpan span) {
        auto e = make(ExprKind::Map, std::move(t), std::move(span));
        e->args_ = {std::move(base), std::move(key)};
        return e;
    }
    static ExprPtr field(ExprPtr base, std::string name, LType t, SourceSpan span) {
        auto e = make(ExprKind::Field, std::move(t), std::move(span));
        e->name_ = std::move(name);
        e->args_ = {std::move(base)};
        return e;
    }
    static ExprPtr call(std::string callee, bool indirect, VarScope scope, std::vector<ExprPtr> args,
                        std::vector<LType> rets, SourceSpan span) {
        LType t = rets.size() == 1 ? rets[0] : LType::unit();
        auto e = make(ExprKind::Call, std::move(t), std::move(span));
        e->name_ = std::move(callee);
        e->indirect_ = indirect;
        e->scope_ = scope;
        e->args_ = std::move(args);
        e->rets_ = std::move(rets);
        return e;
    }
    static ExprPtr old(ExprPtr inner, SourceSpan span) {
        auto e = make(ExprKind::Old, inner->type(), std::move(span));
        e->args_ = {std::move(inner)};
        return e;
    }
    /// Copy of e with variables renamed (locals only) and children replaced.
    static ExprPtr rebuild(const Expr& src, std::string name, std::vector<ExprPtr> args) {
        auto e = std::shared_ptr<Expr>(new Expr(src));
        e->name_ = std::move(name);
        e->args_ = std::move(args);
        return e;
    }

private:
    static std::shared_ptr<Expr> make(ExprKind k, LType t, SourceSpan span) {
        auto e = std::shared_ptr<Expr>(new Expr());
        e->kind_ = k;
        e->type_ = std::move(t);
        e->span_ = std::move(span);
        return e;
    }
};

class StmtBuilder {
public:
    static StmtPtr var(std::optional<Visibility> vis, std::string name, LType t, ExprPtr init, SourceSpan span) {
        auto s = make(StmtKind::Var, std::move(span));
        s->vis_ = vis;
        s->name_ = std::move(name);
        s->type_ = std::move(t);
        s->e1_ = std::move(init);
        return s;
    }
    static StmtPtr assign(ExprPtr lhs, ExprPtr rhs, SourceSpan span) {
        auto s = make(StmtKind::Assignv, std::move(span));
        s->e1_ = std::move(lhs);
        s->e2_ = std::move(rhs);
        return s;
    }
    static StmtPtr if_(ExprPtr cond, StmtList then_b, StmtList else_b, SourceSpan span) {
        auto s = make(StmtKind::If, std::move(span));
        s->e1_ = std::move(cond);
        s->body_ = std::move(then_b);
        s->else_body_ = std::move(else_b);
        return s;
    }
    static StmtPtr while_(ExprPtr cond, StmtList body, SourceSpan span) {
        auto s = make(StmtKind::While, std::move(span));
        s->e1_ = std::move(cond);
        s->body_ = std::move(body);
        return s;
    }
    static StmtPtr for_(StmtList init, ExprPtr cond, StmtList step, StmtList body, SourceSpan span) {
        auto s = make(StmtKind::For, std::move(span));
        s->init_ = std::move(init);
        s->e1_ = std::move(cond);
        s->step_ = std::move(step);
        s->body_ = std::move(body);
        return s;
    }
    static StmtPtr leaf(StmtKind k, SourceSpan span) { return make(k, std::move(span)); }
    static StmtPtr ret(std::vector<ExprPtr> exprs, SourceSpan span) {
        auto s = make(StmtKind::Return, std::move(span));
        s->exprs_ = std::move(exprs);
        return s;
    }
    static StmtPtr call(ExprPtr call, SourceSpan span) {
        auto s = make(StmtKind::CallStmt, std::move(span));
        s->e1_ = std::move(call);
        return s;
    }
    /// Copy of src with every field replaced by the given parts.
    static StmtPtr rebuild(const Stmt& src, std::string name, ExprPtr e1, ExprPtr e2, std::vector<ExprPtr> exprs,
                           StmtList body, StmtList else_body, StmtList init, StmtList step) {
        auto s = std::shared_ptr<Stmt>(new Stmt(src));
        s->name_ = std::move(name);
        s->e1_ = std::move(e1);
        s->e2_ = std::move(e2);
        s->exprs_ = std::move(exprs);
        s->body_ = std::move(body);
        s->else_body_ = std::move(else_body);
        s->init_ = std::move(init);
        s->step_ = std::move(step);
        return s;
    }

private:
    static std::shared_ptr<Stmt> make(StmtKind k, SourceSpan span) {
        auto s = std::shared_ptr<Stmt>(new Stmt());
        s->kind_ = k;
        s->span_ = std::move(span);
        return s;
    }
};

class ContractBuilder {
public:
    static FunctionDef function(std::string name, std::optional<Visibility> vis, std::vector<Param> params,
                                std::vector<LType> rets, std::vector<ModifierUse> mods, StmtList body,
                                SourceSpan span) {
        FunctionDef f;
        f.name_ = std::move(name);
        f.vis_ = vis;
        f.params_ = std::move(params);
        f.rets_ = std::move(rets);
        f.modifiers_ = std::move(mods);
        f.body_ = std::move(body);
        f.span_ = std::move(span);
        return f;
    }
    static ModifierDef modifier(std::string name, std::vector<Param> params, StmtList body, SourceSpan span) {
        ModifierDef m;
        m.name_ = std::move(name);
        m.params_ = std::move(params);
        m.body_ = std::move(body);
        m.span_ = std::move(span);
        return m;
    }
    static Contract contract(std::string name, std::vector<std::string> struct_order, StructTable structs,
                             StmtList state, std::vector<ModifierDef> mods, std::vector<FunctionDef> funs,
                             int uint_width) {
        Contract c;
        c.name_ = std::move(name);
        c.struct_order_ = std::move(struct_order);
        c.structs_ = std::move(structs);
        c.state_ = std::move(state);
        c.modifiers_ = std::move(mods);
        c.functions_ = std::move(funs);
        c.uint_width_ = uint_width;
        return c;
    }
};

}  // namespace fspvm
