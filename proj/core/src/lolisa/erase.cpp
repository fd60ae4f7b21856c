#include "builders.hpp"
#include "fspvm/lolisa.hpp"

namespace fspvm {

UExprPtr erase(const Expr& e) {
    const SourceSpan& s = e.span();
    switch (e.kind()) {
    case ExprKind::Const: return UExpr::constant_of(e.value(), s);
    case ExprKind::Var: return UExpr::var(e.name(), s);
    case ExprKind::Bop: return UExpr::binary(e.binop(), erase(*e.arg(0)), erase(*e.arg(1)), s);
    case ExprKind::Uop: return UExpr::unary(e.unop(), erase(*e.arg(0)), s);
    case ExprKind::Map: return UExpr::index(erase(*e.arg(0)), erase(*e.arg(1)), s);
    case ExprKind::Field: return UExpr::member(erase(*e.arg(0)), e.name(), s);
    case ExprKind::Call: {
        std::vector<UExprPtr> args;
        for (const auto& a : e.args()) {
            args.push_back(erase(*a));
        }
        return UExpr::call(e.name(), std::move(args), s);
    }
    case ExprKind::Old: return UExpr::old(erase(*e.arg(0)), s);
    }
    return nullptr;
}

namespace {

UStmtList erase_list(const StmtList& l) {
    UStmtList out;
    for (const auto& s : l) {
        out.push_back(erase(*s));
    }
    return out;
}

}  // namespace

UStmtPtr erase(const Stmt& s) {
    auto u = std::make_shared<UStmt>();
    u->kind = s.kind();
    u->span = s.span();
    switch (s.kind()) {
    case StmtKind::Var:
        u->vis = s.vis();
        u->name = s.name();
        u->type = UType::of(s.type(), s.span());
        if (s.init_expr()) {
            u->e1 = erase(*s.init_expr());
        }
        break;
    case StmtKind::Assignv:
        u->e1 = erase(*s.lhs());
        u->e2 = erase(*s.rhs());
        break;
    case StmtKind::If:
        u->e1 = erase(*s.cond());
        u->body = erase_list(s.body());
        u->else_body = erase_list(s.else_body());
        break;
    case StmtKind::While:
        u->e1 = erase(*s.cond());
        u->body = erase_list(s.body());
        break;
    case StmtKind::For:
        u->init = erase_list(s.init());
        u->e1 = erase(*s.cond());
        u->step = erase_list(s.step());
        u->body = erase_list(s.body());
        break;
    case StmtKind::Return:
        for (const auto& e : s.exprs()) {
            u->exprs.push_back(erase(*e));
        }
        break;
    case StmtKind::CallStmt: u->e1 = erase(*s.call()); break;
    case StmtKind::Throw:
    case StmtKind::Snil:
    case StmtKind::Placeholder: break;
    }
    return u;
}

UContract erase(const Contract& c) {
    UContract u;
    u.name = c.name();
    for (const auto& name : c.struct_order()) {
        UStructDef sd{name, {}, {}};
        for (const auto& [f, t] : c.structs().at(name)) {
            sd.fields.push_back({f, UType::of(t), {}});
        }
        u.structs.push_back(std::move(sd));
    }
    u.state = erase_list(c.state());
    for (const auto& m : c.modifiers()) {
        UModifierDef md{m.name(), {}, erase_list(m.body()), m.span()};
        for (const auto& p : m.params()) {
            md.params.push_back({p.name, UType::of(p.type), {}});
        }
        u.modifiers.push_back(std::move(md));
    }
    for (const auto& f : c.functions()) {
        UFunctionDef fd;
        fd.name = f.name();
        fd.vis = f.vis();
        fd.span = f.span();
        for (const auto& p : f.params()) {
            fd.params.push_back({p.name, UType::of(p.type), {}});
        }
        for (const auto& r : f.rets()) {
            fd.rets.push_back(UType::of(r));
        }
        for (const auto& m : f.modifiers()) {
            UModifierUse use{m.name, {}, {}};
            for (const auto& a : m.args) {
                use.args.push_back(erase(*a));
            }
            fd.modifiers.push_back(std::move(use));
        }
        fd.body = erase_list(f.body());
        u.functions.push_back(std::move(fd));
    }
    return u;
}

// ---------------------------------------------------------------- modifiers

namespace {

ExprPtr rename_locals(const ExprPtr& e, const std::string& prefix) {
    std::vector<ExprPtr> args;
    for (const auto& a : e->args()) {
        args.push_back(rename_locals(a, prefix));
    }
    bool local = (e->kind() == ExprKind::Var || (e->kind() == ExprKind::Call && e->indirect())) &&
                 e->scope() == VarScope::Local;
    return ExprBuilder::rebuild(*e, local ? prefix + e->name() : e->name(), std::move(args));
}

ExprPtr rename_opt(const ExprPtr& e, const std::string& prefix) { return e ? rename_locals(e, prefix) : nullptr; }

StmtList rewrite(const StmtList& l, const std::string& prefix, const StmtList& hole);

StmtPtr rewrite(const StmtPtr& s, const std::string& prefix, const StmtList& hole) {
    std::vector<ExprPtr> exprs;
    for (const auto& e : s->exprs()) {
        exprs.push_back(rename_locals(e, prefix));
    }
    std::string name = s->kind() == StmtKind::Var ? prefix + s->name() : s->name();
    return StmtBuilder::rebuild(*s, std::move(name), rename_opt(s->cond(), prefix), rename_opt(s->rhs(), prefix),
                                std::move(exprs), rewrite(s->body(), prefix, hole),
                                rewrite(s->else_body(), prefix, hole), rewrite(s->init(), prefix, hole),
                                rewrite(s->step(), prefix, hole));
}

StmtList rewrite(const StmtList& l, const std::string& prefix, const StmtList& hole) {
    StmtList out;
    for (const auto& s : l) {
        if (s->kind() == StmtKind::Placeholder) {
            out.insert(out.end(), hole.begin(), hole.end());
        } else {
            out.push_back(rewrite(s, prefix, hole));
        }
    }
    return out;
}

}  // namespace

StmtList expand_modifiers(const Contract& c, const FunctionDef& f) {
    StmtList body = f.body();
    const auto& uses = f.modifiers();
    for (std::size_t k = uses.size(); k-- > 0;) {
        const ModifierDef* m = c.find_modifier(uses[k].name);
        if (!m) {
            throw TypeErrors({TypeError{TypeErrorKind::UnknownModifier, "unknown modifier '" + uses[k].name + "'",
                                        f.span()}});
        }
        std::string prefix = m->name() + "#" + std::to_string(k) + ".";
        StmtList out;
        for (std::size_t j = 0; j < m->params().size(); ++j) {
            const Param& p = m->params()[j];
            out.push_back(StmtBuilder::var(std::nullopt, prefix + p.name, p.type, uses[k].args[j], m->span()));
        }
        StmtList inner = rewrite(m->body(), prefix, body);
        out.insert(out.end(), inner.begin(), inner.end());
        body = std::move(out);
    }
    return body;
}

// ---------------------------------------------------------------- equality

namespace {

bool same_ptr(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) {
        return !a && !b;
    }
    return same_tree(*a, *b);
}

bool same_exprs(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!same_ptr(a[i], b[i])) {
            return false;
        }
    }
    return true;
}

bool same_list(const StmtList& a, const StmtList& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!same_tree(*a[i], *b[i])) {
            return false;
        }
    }
    return true;
}

bool same_params(const std::vector<Param>& a, const std::vector<Param>& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].name != b[i].name || !(a[i].type == b[i].type)) {
            return false;
        }
    }
    return true;
}

}  // namespace

bool same_tree(const Expr& a, const Expr& b) {
    if (a.kind() != b.kind() || !(a.type() == b.type())) {
        return false;
    }
    switch (a.kind()) {
    case ExprKind::Const: return a.value() == b.value();
    case ExprKind::Var: return a.name() == b.name() && a.scope() == b.scope();
    case ExprKind::Bop: return a.binop() == b.binop() && same_exprs(a.args(), b.args());
    case ExprKind::Uop: return a.unop() == b.unop() && same_exprs(a.args(), b.args());
    case ExprKind::Field: return a.name() == b.name() && same_exprs(a.args(), b.args());
    case ExprKind::Call:
        return a.name() == b.name() && a.indirect() == b.indirect() && a.ret_types() == b.ret_types() &&
               same_exprs(a.args(), b.args());
    case ExprKind::Map:
    case ExprKind::Old: return same_exprs(a.args(), b.args());
    }
    return false;
}

bool same_tree(const Stmt& a, const Stmt& b) {
    if (a.kind() != b.kind()) {
        return false;
    }
    if (a.kind() == StmtKind::Var &&
        (a.vis() != b.vis() || a.name() != b.name() || !(a.type() == b.type()))) {
        return false;
    }
    return same_ptr(a.cond(), b.cond()) && same_ptr(a.rhs(), b.rhs()) && same_exprs(a.exprs(), b.exprs()) &&
           same_list(a.body(), b.body()) && same_list(a.else_body(), b.else_body()) &&
           same_list(a.init(), b.init()) && same_list(a.step(), b.step());
}

bool same_tree(const Contract& a, const Contract& b) {
    if (a.name() != b.name() || a.struct_order() != b.struct_order() || a.structs() != b.structs() ||
        a.uint_width() != b.uint_width() || !same_list(a.state(), b.state()) ||
        a.modifiers().size() != b.modifiers().size() || a.functions().size() != b.functions().size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.modifiers().size(); ++i) {
        const auto& x = a.modifiers()[i];
        const auto& y = b.modifiers()[i];
        if (x.name() != y.name() || !same_params(x.params(), y.params()) || !same_list(x.body(), y.body())) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.functions().size(); ++i) {
        const auto& x = a.functions()[i];
        const auto& y = b.functions()[i];
        if (x.name() != y.name() || x.vis() != y.vis() || !same_params(x.params(), y.params()) ||
            x.rets() != y.rets() || !same_list(x.body(), y.body()) ||
            x.modifiers().size() != y.modifiers().size()) {
            return false;
        }
        for (std::size_t j = 0; j < x.modifiers().size(); ++j) {
            if (x.modifiers()[j].name != y.modifiers()[j].name ||
                !same_exprs(x.modifiers()[j].args, y.modifiers()[j].args)) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace fspvm
