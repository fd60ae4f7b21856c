#include <functional>
#include <sstream>

#include "fspvm/frontend.hpp"
#include "fspvm/verifier.hpp"

namespace fspvm {

std::string_view revert_policy_keyword(RevertPolicy p) {
    switch (p) {
    case RevertPolicy::RevertAllowed: return "allow";
    case RevertPolicy::RevertRequired: return "require";
    case RevertPolicy::PostMustHold: return "forbid";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool is_ident(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) {
        return false;
    }
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

}  // namespace

std::vector<PropertySpec> parse_spec(const std::string& text, const std::string& file) {
    std::vector<PropertySpec> out;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    bool has_entry = false;
    auto finish = [&] {
        if (!out.empty() && !has_entry) {
            throw SpecError("property " + out.back().name + " has no entry line", out.back().span);
        }
    };
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto c = line.find("//"); c != std::string::npos) {
            line = line.substr(0, c);
        }
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        const std::size_t indent = line.find_first_not_of(" \t");
        const std::size_t kw_end = t.find_first_of(" \t");
        const std::string kw = t.substr(0, kw_end);
        const std::string rest = kw_end == std::string::npos ? "" : trim(t.substr(kw_end));
        SourceSpan span{file, lineno, static_cast<int>(indent) + 1, lineno, static_cast<int>(indent + t.size())};
        // Expressions are parsed from the original line with the keyword
        // blanked so their spans point into the spec file.
        auto expr_of = [&](const std::string& body) {
            std::size_t at = line.find(body, indent + kw.size());
            return parse_expression(std::string(at, ' ') + body, file, lineno);
        };
        if (kw == "property") {
            finish();
            if (!is_ident(rest)) {
                throw SpecError("property needs a name", span);
            }
            out.push_back(PropertySpec{});
            out.back().name = rest;
            out.back().span = span;
            has_entry = false;
            continue;
        }
        if (out.empty()) {
            throw SpecError("'" + kw + "' before any property line", span);
        }
        PropertySpec& p = out.back();
        if (kw == "entry") {
            if (has_entry) {
                throw SpecError("second entry line for property " + p.name, span);
            }
            UExprPtr call = expr_of(rest);
            if (call->kind == UExprKind::Var) {
                call = UExpr::call(call->text, {}, call->span);
            }
            if (call->kind != UExprKind::Call) {
                throw SpecError("entry must be a call such as f(x, y)", span);
            }
            p.entry = call->text;
            p.entry_args = call->args;
            has_entry = true;
        } else if (kw == "var") {
            auto colon = rest.find(':');
            if (colon == std::string::npos) {
                throw SpecError("var lines read 'var <name> : <type>'", span);
            }
            std::string name = trim(rest.substr(0, colon));
            std::string type = trim(rest.substr(colon + 1));
            if (!is_ident(name) || !is_ident(type)) {
                throw SpecError("var lines read 'var <name> : <elementary type>'", span);
            }
            p.vars.push_back(SpecVar{name, UType::named(type, span)});
        } else if (kw == "require" || kw == "ensure") {
            if (rest.empty()) {
                throw SpecError(kw + " needs an expression", span);
            }
            SpecClause clause{expr_of(rest), rest, span};
            (kw == "require" ? p.pre : p.post).push_back(std::move(clause));
        } else if (kw == "on_revert") {
            if (rest == "allow") {
                p.on_revert = RevertPolicy::RevertAllowed;
            } else if (rest == "require") {
                p.on_revert = RevertPolicy::RevertRequired;
            } else if (rest == "forbid") {
                p.on_revert = RevertPolicy::PostMustHold;
            } else {
                throw SpecError("on_revert takes allow, require or forbid", span);
            }
        } else {
            throw SpecError("unknown spec keyword '" + kw + "'", span);
        }
    }
    finish();
    return out;
}

namespace {

void reject_calls(const Expr& e, const SourceSpan& where) {
    if (e.kind() == ExprKind::Call) {
        throw SpecError("function calls are not allowed in specifications", e.span().line ? e.span() : where);
    }
    for (const auto& a : e.args()) {
        reject_calls(*a, where);
    }
}

}  // namespace

BoundSpec bind_spec(const Contract& c, const PropertySpec& spec) {
    BoundSpec b;
    b.spec = spec;
    b.function = c.find_function(spec.entry);
    if (!b.function) {
        throw SpecError("contract " + c.name() + " has no function '" + spec.entry + "'", spec.span);
    }
    const auto& params = b.function->params();
    if (params.size() != spec.entry_args.size()) {
        throw SpecError(spec.entry + " takes " + std::to_string(params.size()) + " arguments, entry gives " +
                            std::to_string(spec.entry_args.size()),
                        spec.span);
    }
    const TypeContext base = TypeContext::for_contract(c);
    TypeContext ctx = base.push_scope();
    auto declare = [&](const std::string& name, const LType& t, const SourceSpan& span) {
        VarScope scope = VarScope::Local;
        if (base.lookup_var(name, &scope) && scope == VarScope::State) {
            throw SpecError("'" + name + "' shadows a state variable", span);
        }
        ctx = ctx.with_var(name, t, span);
    };
    for (std::size_t i = 0; i < params.size(); ++i) {
        const UExpr& a = *spec.entry_args[i];
        if (a.kind == UExprKind::Var) {
            declare(a.text, params[i].type, a.span);
            b.symbolic_args.emplace_back(a.text, params[i].type);
            b.fixed_args.emplace_back(std::nullopt);
        } else {
            ExprPtr v = typecheck_expr(base, a, params[i].type);
            if (v->kind() != ExprKind::Const) {
                throw SpecError("entry arguments are identifiers or literals", a.span);
            }
            b.symbolic_args.emplace_back("", params[i].type);
            b.fixed_args.emplace_back(v->value());
        }
    }
    for (const auto& v : spec.vars) {
        LType t = ctx.resolve_type(v.type);
        declare(v.name, t, v.type.span);
        b.vars.emplace_back(v.name, t);
    }
    for (const auto& clause : spec.pre) {
        ExprPtr e = typecheck_expr(ctx, *clause.expr, LType::boolean());
        reject_calls(*e, clause.span);
        b.pre.push_back(e);
    }
    TypeContext post = ctx;
    const auto& rets = b.function->rets();
    for (std::size_t i = 0; i < rets.size(); ++i) {
        post = post.with_var("result_" + std::to_string(i), rets[i]);
    }
    post = post.with_old(true);
    for (const auto& clause : spec.post) {
        ExprPtr e = typecheck_expr(post, *clause.expr, LType::boolean());
        reject_calls(*e, clause.span);
        b.post.push_back(e);
    }
    return b;
}

SymExpr eval_spec(const Expr& e, const EntryState& entry, const MemoryState& final_mem,
                  const std::vector<SymExpr>& returns) {
    std::function<SymExpr(const Expr&, const MemoryState&)> go = [&](const Expr& x,
                                                                     const MemoryState& mem) -> SymExpr {
        switch (x.kind()) {
        case ExprKind::Const: return SymExpr::concrete(x.value());
        case ExprKind::Var:
            switch (x.scope()) {
            case VarScope::Builtin:
                if (x.name() == "now") {
                    return entry.env.now;
                }
                if (x.name() == "msg.sender") {
                    return entry.env.msg_sender;
                }
                if (x.name() == "msg.value") {
                    return entry.env.msg_value;
                }
                if (x.name() == "block.number") {
                    return entry.env.block_number;
                }
                return SymExpr::concrete(entry.env.this_address);
            case VarScope::State: return get_state(mem, entry.fenv, x.name());
            case VarScope::Local: {
                if (auto it = entry.locals.find(x.name()); it != entry.locals.end()) {
                    return it->second;
                }
                if (x.name().rfind("result_", 0) == 0) {
                    std::size_t i = std::stoul(x.name().substr(7));
                    if (i < returns.size()) {
                        return returns[i];
                    }
                    throw SpecError(x.name() + " is not available on this path", x.span());
                }
                throw SpecError("unbound spec variable " + x.name(), x.span());
            }
            }
            break;
        case ExprKind::Bop: return simplify(SymExpr::binary(x.binop(), go(*x.arg(0), mem), go(*x.arg(1), mem)));
        case ExprKind::Uop: return simplify(SymExpr::unary(x.unop(), go(*x.arg(0), mem)));
        case ExprKind::Map: return simplify(SymExpr::select(go(*x.arg(0), mem), go(*x.arg(1), mem)));
        case ExprKind::Field: return simplify(SymExpr::field(go(*x.arg(0), mem), x.name(), x.type()));
        case ExprKind::Old: return go(*x.arg(0), entry.mem);
        case ExprKind::Call: break;
        }
        throw SpecError("unsupported expression in specification", x.span());
    };
    return go(e, final_mem);
}

}  // namespace fspvm
