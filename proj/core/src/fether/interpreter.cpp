#include <algorithm>
#include <limits>

#include "fspvm/fether.hpp"
#include "fspvm/frontend.hpp"

namespace fspvm {

std::string_view fault_name(FaultKind k) {
    switch (k) {
    case FaultKind::TypeMismatch: return "TypeMismatch";
    case FaultKind::UndeclaredRead: return "UndeclaredRead";
    case FaultKind::NotAnLValue: return "NotAnLValue";
    case FaultKind::UnboundIdentifier: return "UnboundIdentifier";
    case FaultKind::UnknownFunction: return "UnknownFunction";
    case FaultKind::ArityMismatch: return "ArityMismatch";
    case FaultKind::CallDepthExceeded: return "CallDepthExceeded";
    case FaultKind::MemoryFull: return "MemoryFull";
    case FaultKind::SymbolicInConcreteMode: return "SymbolicInConcreteMode";
    case FaultKind::Unsupported: return "Unsupported";
    }
    return "?";
}

std::string_view outcome_name(OutcomeKind k) {
    switch (k) {
    case OutcomeKind::Normal: return "Normal";
    case OutcomeKind::Reverted: return "Reverted";
    case OutcomeKind::OutOfGas: return "OutOfGas";
    case OutcomeKind::Fault: return "Fault";
    case OutcomeKind::Forked: return "Forked";
    }
    return "?";
}

const CompiledFunction* FunctionEnv::find(const std::string& name) const {
    auto it = functions.find(name);
    return it == functions.end() ? nullptr : &it->second;
}

namespace {

struct RevertSignal {
    std::string reason;
    SourceSpan span;
    bool div_by_zero = false;
};

struct ForkSignal {
    SymExpr guard;
    SourceSpan span;
};

struct Located {
    ExecError error;
    SourceSpan span;
};

enum class Flow { Continue, Return, Revert };

struct Frame {
    std::string function;
    std::vector<std::map<std::string, MemAddress>> scopes;
};

struct PathStep {
    bool is_map;
    SymExpr key;
    std::string field;
    LType type;  // type of the container at this step
};

class Machine {
public:
    Machine(const MemoryState& mem, const Environment& env, const FunctionEnv& fenv, const ExecOptions& opts)
        : fenv_(fenv), opts_(opts), env_(env), mem_(mem), last_traced_(mem) {}

    ExecOutcome call(const std::string& name, const std::vector<SymExpr>& args) {
        return guarded([&] {
            const CompiledFunction* f = fenv_.find(name);
            if (!f) {
                throw ExecError(FaultKind::UnknownFunction, "no function '" + name + "'");
            }
            if (args.size() != f->params.size()) {
                throw ExecError(FaultKind::ArityMismatch, name + " expects " + std::to_string(f->params.size()) +
                                                              " arguments, got " + std::to_string(args.size()));
            }
            for (std::size_t i = 0; i < args.size(); ++i) {
                if (!(args[i].type() == f->params[i].type)) {
                    throw ExecError(FaultKind::TypeMismatch, "argument " + f->params[i].name + " of " + name +
                                                                 " has type " + args[i].type().str() + ", expected " +
                                                                 f->params[i].type.str());
                }
                need_concrete(args[i], f->span);
            }
            return invoke(*f, args, false);
        });
    }

    ExecOutcome run(const StmtList& body) {
        return guarded([&] {
            frames_.push_back(Frame{"<main>", {{}}});
            std::vector<SymExpr> rets;
            if (exec_list(body, false) == Flow::Return) {
                rets = std::move(returned_);
            }
            return rets;
        });
    }

    SymExpr eval_top(const Expr& e) {
        frames_.push_back(Frame{"<expr>", {{}}});
        try {
            return eval(e);
        } catch (const RevertSignal& r) {
            if (r.div_by_zero) {
                throw DomainError(DomainErrorKind::DivByZero, "division by zero");
            }
            throw ExecError(FaultKind::Unsupported, "expression reverted: " + r.reason);
        } catch (const ForkSignal&) {
            throw ExecError(FaultKind::Unsupported, "expression branches on a symbolic condition");
        } catch (const Located& l) {
            throw l.error;
        }
    }

    const Environment& env() const { return env_; }

private:
    template <class F>
    ExecOutcome guarded(F&& body) {
        const MemoryState entry = mem_;
        ExecOutcome out;
        try {
            out.returns = body();
            if (pending_revert_) {
                throw *pending_revert_;
            }
            out.kind = OutcomeKind::Normal;
            out.mem = mem_;
        } catch (const RevertSignal& r) {
            out.kind = OutcomeKind::Reverted;
            out.mem = entry;
            out.revert_reason = r.reason;
            out.where = r.span;
        } catch (const OutOfGasSignal&) {
            out.kind = OutcomeKind::OutOfGas;
            out.mem = mem_;
        } catch (const ForkSignal& f) {
            out.kind = OutcomeKind::Forked;
            out.mem = mem_;
            out.fork_guard = f.guard;
            out.where = f.span;
        } catch (const Located& l) {
            fault(out, l.error.kind(), l.error.what(), l.span);
        } catch (const ExecError& e) {
            fault(out, e.kind(), e.what(), {});
        }
        if (opts_.trace) {
            trace_line("<end>");
        }
        out.env = env_;
        out.pc = std::move(pc_);
        out.branches = std::move(branches_);
        out.trace = std::move(trace_);
        return out;
    }

    void fault(ExecOutcome& out, FaultKind k, const std::string& msg, const SourceSpan& span) {
        out.kind = OutcomeKind::Fault;
        out.mem = mem_;
        out.fault = k;
        out.fault_message = msg;
        out.where = span;
    }

    [[noreturn]] void fail(FaultKind k, const std::string& msg, const SourceSpan& span) {
        throw Located{ExecError(k, msg), span};
    }

    void charge() {
        if (env_.gas_used >= env_.gas_limit) {
            throw OutOfGasSignal{};
        }
        ++env_.gas_used;
    }

    bool symbolic() const { return opts_.mode == ExecMode::Symbolic; }

    const SymExpr& need_concrete(const SymExpr& v, const SourceSpan& span) {
        if (!symbolic() && !v.is_concrete()) {
            fail(FaultKind::SymbolicInConcreteMode, "symbolic value " + v.render() + " in concrete mode", span);
        }
        return v;
    }

    // Resolves a branch: concrete guards select directly, symbolic ones
    // consume the next decision or stop execution with a fork.
    bool decide(const SymExpr& guard, const SourceSpan& span) {
        SymExpr g = symbolic() ? simplify(guard) : guard;
        if (g.is_concrete()) {
            return g.value().as_bool();
        }
        need_concrete(g, span);
        if (fork_index_ >= opts_.decisions.size()) {
            throw ForkSignal{g, span};
        }
        bool taken = opts_.decisions[fork_index_++];
        pc_.push_back(Constraint{taken ? g : simplify(SymExpr::unary(UnOp::Not, g)), span.str()});
        branches_.push_back(BranchRecord{taken, g, span});
        return taken;
    }

    // ------------------------------------------------------------ memory

    template <class F>
    MemoryState guard_mem(F&& f, const SourceSpan& span) {
        try {
            return f();
        } catch (const MemoryError& e) {
            fail(memory_fault(e.kind()), e.what(), span);
        }
    }

    static FaultKind memory_fault(MemoryErrorKind k) {
        switch (k) {
        case MemoryErrorKind::MemoryFull: return FaultKind::MemoryFull;
        case MemoryErrorKind::UndeclaredRead: return FaultKind::UndeclaredRead;
        default: return FaultKind::TypeMismatch;
        }
    }

    SymExpr read_at(MemAddress a, const LType& t, const SourceSpan& span) {
        try {
            return need_concrete(read(mem_, a, t, fenv_.structs), span);
        } catch (const MemoryError& e) {
            fail(memory_fault(e.kind()), e.what(), span);
        } catch (const DomainError& e) {
            fail(FaultKind::TypeMismatch, e.what(), span);
        }
    }

    void write_at(MemAddress a, SymExpr v, const SourceSpan& span) {
        mem_ = guard_mem([&] { return write(mem_, a, std::move(v)); }, span);
    }

    MemAddress declare(const std::string& name, const LType& t, std::optional<Visibility> vis,
                       const SourceSpan& span) {
        MemAddress addr{};
        mem_ = guard_mem(
            [&] {
                auto [a, m] = allocate(mem_, name, t, vis);
                addr = a;
                return m;
            },
            span);
        frames_.back().scopes.back()[name] = addr;
        return addr;
    }

    std::optional<MemAddress> local(const std::string& name) const {
        const auto& scopes = frames_.back().scopes;
        for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
            if (auto f = it->find(name); f != it->end()) {
                return f->second;
            }
        }
        return std::nullopt;
    }

    MemAddress address_of(const Expr& e) {
        if (e.scope() == VarScope::Builtin) {
            fail(FaultKind::NotAnLValue, "built-in '" + e.name() + "' is not assignable", e.span());
        }
        if (e.scope() == VarScope::Local) {
            if (auto a = local(e.name())) {
                return *a;
            }
        } else if (auto it = fenv_.state.find(e.name()); it != fenv_.state.end()) {
            return it->second.address;
        }
        fail(FaultKind::UnboundIdentifier, "no variable '" + e.name() + "' in scope", e.span());
    }

    // ------------------------------------------------------------ expressions

    SymExpr builtin(const Expr& e) {
        const std::string& n = e.name();
        SymExpr v;
        if (n == "now") {
            v = env_.now;
        } else if (n == "msg.sender") {
            v = env_.msg_sender;
        } else if (n == "msg.value") {
            v = env_.msg_value;
        } else if (n == "block.number") {
            v = env_.block_number;
        } else if (n == "this") {
            v = SymExpr::concrete(env_.this_address);
        } else {
            fail(FaultKind::UnboundIdentifier, "unknown built-in '" + n + "'", e.span());
        }
        if (!(v.type() == e.type())) {
            fail(FaultKind::TypeMismatch, "built-in " + n + " has type " + v.type().str() + ", expected " +
                                              e.type().str(), e.span());
        }
        return need_concrete(v, e.span());
    }

    SymExpr binop(BinOp op, const SymExpr& a, const SymExpr& b, const SourceSpan& span) {
        if (!symbolic()) {
            try {
                return SymExpr::concrete(apply_binop(op, a.value(), b.value()));
            } catch (const DomainError& e) {
                if (e.kind() == DomainErrorKind::DivByZero) {
                    throw RevertSignal{"division by zero", span, true};
                }
                fail(FaultKind::TypeMismatch, e.what(), span);
            }
        }
        if (opts_.symbolic_binop_hook) {
            if (auto r = opts_.symbolic_binop_hook(op, a, b)) {
                return simplify(*r);
            }
        }
        return simplify(SymExpr::binary(op, a, b));
    }

    SymExpr eval(const Expr& e) {
        charge();
        switch (e.kind()) {
        case ExprKind::Const: return SymExpr::concrete(e.value());
        case ExprKind::Var:
            if (e.scope() == VarScope::Builtin) {
                return builtin(e);
            }
            return read_at(address_of(e), e.type(), e.span());
        case ExprKind::Bop: {
            const BinOp op = e.binop();
            SymExpr a = eval(*e.arg(0));
            if (op == BinOp::And || op == BinOp::Or) {
                bool left = decide(a, e.arg(0)->span());
                if (left == (op == BinOp::Or)) {
                    return SymExpr::concrete(Value::boolean(left));
                }
                return eval(*e.arg(1));
            }
            SymExpr b = eval(*e.arg(1));
            if ((op == BinOp::Div || op == BinOp::Mod) && symbolic()) {
                SymExpr zero = SymExpr::concrete(default_value(b.type()));
                if (decide(SymExpr::binary(BinOp::Eq, b, zero), e.arg(1)->span())) {
                    throw RevertSignal{"division by zero", e.span(), true};
                }
            }
            return binop(op, a, b, e.span());
        }
        case ExprKind::Uop: {
            SymExpr a = eval(*e.arg(0));
            if (!symbolic()) {
                return SymExpr::concrete(apply_unop(e.unop(), a.value()));
            }
            return simplify(SymExpr::unary(e.unop(), a));
        }
        case ExprKind::Map: {
            SymExpr m = eval(*e.arg(0));
            SymExpr k = eval(*e.arg(1));
            if (!symbolic()) {
                return SymExpr::concrete(m.value().map_get(k.value()));
            }
            return simplify(SymExpr::select(m, k));
        }
        case ExprKind::Field: {
            SymExpr s = eval(*e.arg(0));
            if (!symbolic()) {
                return SymExpr::concrete(s.value().field(e.name()));
            }
            return simplify(SymExpr::field(s, e.name(), e.type()));
        }
        case ExprKind::Call: {
            auto rets = call_expr(e);
            return rets.size() == 1 ? rets[0] : SymExpr::concrete(Value::unit());
        }
        case ExprKind::Old: fail(FaultKind::Unsupported, "old() outside a specification", e.span());
        }
        fail(FaultKind::Unsupported, "unknown expression", e.span());
    }

    std::vector<SymExpr> call_expr(const Expr& e) {
        std::string target = e.name();
        if (e.indirect()) {
            MemAddress slot = address_of(e);
            SymExpr fp = read_at(slot, *mem_.block(slot).decl_type, e.span());
            if (!fp.is_concrete()) {
                fail(FaultKind::Unsupported, "call through a symbolic function pointer", e.span());
            }
            target = fp.value().funptr_name();
        }
        std::vector<SymExpr> args;
        args.reserve(e.args().size());
        for (const auto& a : e.args()) {
            args.push_back(eval(*a));
        }
        const CompiledFunction* f = fenv_.find(target);
        if (!f) {
            fail(FaultKind::UnknownFunction, "no function '" + target + "'", e.span());
        }
        if (f->params.size() != args.size()) {
            fail(FaultKind::ArityMismatch, target + " expects " + std::to_string(f->params.size()) + " arguments",
                 e.span());
        }
        return invoke(*f, args);
    }

    std::vector<SymExpr> invoke(const CompiledFunction& f, const std::vector<SymExpr>& args, bool nested = true) {
        if (env_.call_depth >= env_.max_call_depth) {
            fail(FaultKind::CallDepthExceeded, "call depth limit " + std::to_string(env_.max_call_depth) +
                                                   " reached calling " + f.name, f.span);
        }
        ++env_.call_depth;
        const std::uint32_t cursor = mem_.alloc_cursor();
        frames_.push_back(Frame{f.name, {{}}});
        for (std::size_t i = 0; i < args.size(); ++i) {
            MemAddress a = declare(f.params[i].name, f.params[i].type, std::nullopt, f.span);
            write_at(a, args[i], f.span);
        }
        std::vector<SymExpr> rets;
        const Flow flow = exec_list(f.body, false);
        if (flow == Flow::Revert) {
            if (nested) {
                RevertSignal r = std::move(*pending_revert_);
                pending_revert_.reset();
                throw r;
            }
            return rets;
        }
        if (flow == Flow::Return) {
            rets = std::move(returned_);
        } else {
            for (const auto& t : f.rets) {
                rets.push_back(SymExpr::concrete(default_value(t, fenv_.structs)));
            }
        }
        frames_.pop_back();
        mem_ = release_to(mem_, cursor);
        --env_.call_depth;
        return rets;
    }

    // ------------------------------------------------------------ statements

    Flow exec_list(const StmtList& list, bool scoped) {
        const std::uint32_t cursor = mem_.alloc_cursor();
        if (scoped) {
            frames_.back().scopes.emplace_back();
        }
        Flow flow = Flow::Continue;
        for (const auto& s : list) {
            flow = exec(*s);
            if (flow != Flow::Continue) {
                break;
            }
        }
        if (scoped) {
            frames_.back().scopes.pop_back();
            mem_ = release_to(mem_, cursor);
        }
        return flow;
    }

    void trace_line(const std::string& head) {
        std::string delta;
        for (const auto& d : mem_diff(last_traced_, mem_)) {
            delta += (delta.empty() ? "" : ",") + d.address.str();
        }
        trace_.push_back("gas=" + std::to_string(env_.gas_used) + " stmt=" + head + " mem_delta=[" + delta + "]");
        last_traced_ = mem_;
    }

    Flow exec(const Stmt& s) {
        charge();
        if (opts_.trace) {
            trace_line(stmt_head(s, fenv_.uint_width));
        }
        switch (s.kind()) {
        case StmtKind::Var: {
            std::optional<SymExpr> init;
            if (s.init_expr()) {
                init = eval(*s.init_expr());
            }
            MemAddress a = declare(s.name(), s.type(), s.vis(), s.span());
            if (init) {
                write_at(a, *init, s.span());
            }
            return Flow::Continue;
        }
        case StmtKind::Assignv: {
            SymExpr v = eval(*s.rhs());
            assign(*s.lhs(), v);
            return Flow::Continue;
        }
        case StmtKind::If: {
            bool c = decide(eval(*s.cond()), s.cond()->span());
            return exec_list(c ? s.body() : s.else_body(), true);
        }
        case StmtKind::While:
            while (decide(eval(*s.cond()), s.cond()->span())) {
                if (Flow flow = exec_list(s.body(), true); flow != Flow::Continue) {
                    return flow;
                }
            }
            return Flow::Continue;
        case StmtKind::For: {
            const std::uint32_t cursor = mem_.alloc_cursor();
            frames_.back().scopes.emplace_back();
            Flow flow = exec_list(s.init(), false);
            while (flow == Flow::Continue && decide(eval(*s.cond()), s.cond()->span())) {
                flow = exec_list(s.body(), true);
                if (flow == Flow::Continue) {
                    flow = exec_list(s.step(), false);
                }
            }
            frames_.back().scopes.pop_back();
            mem_ = release_to(mem_, cursor);
            return flow;
        }
        case StmtKind::Throw:
            pending_revert_ = RevertSignal{"throw", s.span()};
            return Flow::Revert;
        case StmtKind::Snil:
        case StmtKind::Placeholder: return Flow::Continue;
        case StmtKind::Return: {
            std::vector<SymExpr> vals;
            for (const auto& e : s.exprs()) {
                vals.push_back(eval(*e));
            }
            returned_ = std::move(vals);
            return Flow::Return;
        }
        case StmtKind::CallStmt: eval(*s.call()); return Flow::Continue;
        }
        return Flow::Continue;
    }

    // Lvalues are resolved to a root block plus a path of map keys and
    // field names; the write rebuilds the containers along the path.
    void assign(const Expr& lhs, const SymExpr& v) {
        std::vector<PathStep> path;
        const Expr* cur = &lhs;
        while (cur->kind() == ExprKind::Map || cur->kind() == ExprKind::Field) {
            charge();
            const Expr& base = *cur->arg(0);
            if (cur->kind() == ExprKind::Map) {
                path.push_back(PathStep{true, eval(*cur->arg(1)), {}, base.type()});
            } else {
                path.push_back(PathStep{false, {}, cur->name(), base.type()});
            }
            cur = &base;
        }
        if (cur->kind() != ExprKind::Var) {
            fail(FaultKind::NotAnLValue, "expression is not assignable", lhs.span());
        }
        charge();
        MemAddress root = address_of(*cur);
        std::reverse(path.begin(), path.end());
        SymExpr contents = path.empty() ? SymExpr() : read_at(root, cur->type(), cur->span());
        write_at(root, update(contents, path, 0, v, lhs.span()), lhs.span());
    }

    SymExpr update(const SymExpr& container, const std::vector<PathStep>& path, std::size_t i, const SymExpr& v,
                   const SourceSpan& span) {
        if (i == path.size()) {
            return v;
        }
        const PathStep& st = path[i];
        if (!symbolic()) {
            const Value& c = container.value();
            if (st.is_map) {
                Value inner = c.map_get(st.key.value());
                return SymExpr::concrete(
                    c.map_set(st.key.value(), update(SymExpr::concrete(inner), path, i + 1, v, span).value()));
            }
            Value inner = c.field(st.field);
            return SymExpr::concrete(
                c.with_field(st.field, update(SymExpr::concrete(inner), path, i + 1, v, span).value()));
        }
        if (st.is_map) {
            SymExpr inner = simplify(SymExpr::select(container, st.key));
            return simplify(SymExpr::store(container, st.key, update(inner, path, i + 1, v, span)));
        }
        const auto& fields = fenv_.structs.at(st.type.struct_name());
        auto f = std::find_if(fields.begin(), fields.end(), [&](const auto& p) { return p.first == st.field; });
        if (f == fields.end()) {
            fail(FaultKind::TypeMismatch, "no field " + st.field, span);
        }
        SymExpr inner = simplify(SymExpr::field(container, st.field, f->second));
        return simplify(SymExpr::field_store(container, st.field, update(inner, path, i + 1, v, span)));
    }

    const FunctionEnv& fenv_;
    const ExecOptions& opts_;
    Environment env_;
    MemoryState mem_;
    MemoryState last_traced_;
    std::vector<Frame> frames_;
    std::vector<SymExpr> returned_;
    std::optional<RevertSignal> pending_revert_;
    std::size_t fork_index_ = 0;
    std::vector<Constraint> pc_;
    std::vector<BranchRecord> branches_;
    std::vector<std::string> trace_;
};

SymExpr zero_of(const LType& t) { return SymExpr::concrete(default_value(t)); }

}  // namespace

std::tuple<Environment, FunctionEnv, MemoryState> init_env(const Contract& program, const TxParams& tx,
                                                          const MemoryState& mem0) {
    FunctionEnv fenv;
    fenv.structs = program.structs();
    fenv.uint_width = program.uint_width();
    for (const auto& f : program.functions()) {
        fenv.functions[f.name()] =
            CompiledFunction{f.name(), f.vis(), f.params(), f.rets(), expand_modifiers(program, f), f.span()};
    }
    Environment env;
    const LType uint_t = LType::uint(program.uint_width());
    env.msg_sender = tx.sender.value_or(zero_of(LType::address()));
    env.msg_value = tx.value.value_or(zero_of(uint_t));
    env.block_number = tx.block_number.value_or(zero_of(uint_t));
    env.now = tx.now.value_or(zero_of(uint_t));
    env.this_address = tx.this_address.value_or(Value::address(Bits256(0xC0FFEE)));
    env.gas_limit = tx.gas_limit;
    env.max_call_depth = tx.max_call_depth;

    MemoryState mem = mem0;
    for (const auto& s : program.state()) {
        if (s->kind() != StmtKind::Var) {
            continue;
        }
        auto [addr, m] = allocate(mem, s->name(), s->type(), s->vis());
        mem = m;
        fenv.state[s->name()] = StateSlot{addr, s->type()};
        fenv.state_order.push_back(s->name());
        if (s->init_expr()) {
            Environment scratch = env;
            scratch.gas_limit = std::numeric_limits<std::uint64_t>::max();
            mem = write(mem, addr, eval_expr(mem, scratch, fenv, *s->init_expr()));
        }
    }
    return {env, std::move(fenv), mem};
}

Environment set_gas(Environment env, std::uint64_t limit) {
    env.gas_limit = limit;
    env.gas_used = 0;
    return env;
}

SymExpr eval_expr(const MemoryState& mem, Environment& env, const FunctionEnv& fenv, const Expr& e, ExecMode mode) {
    ExecOptions opts;
    opts.mode = mode;
    Machine m(mem, env, fenv, opts);
    SymExpr v = m.eval_top(e);
    env = m.env();
    return v;
}

ExecOutcome run_program(const MemoryState& mem, const Environment& env, const FunctionEnv& fenv,
                        const StmtList& body, const ExecOptions& opts) {
    return Machine(mem, env, fenv, opts).run(body);
}

ExecOutcome call_function(const MemoryState& mem, const Environment& env, const FunctionEnv& fenv,
                          const std::string& name, const std::vector<SymExpr>& args, const ExecOptions& opts) {
    return Machine(mem, env, fenv, opts).call(name, args);
}

MemoryState set_state(const MemoryState& mem, const FunctionEnv& fenv, const std::string& name, SymExpr v) {
    auto it = fenv.state.find(name);
    if (it == fenv.state.end()) {
        throw ExecError(FaultKind::UnboundIdentifier, "no state variable '" + name + "'");
    }
    return write(mem, it->second.address, std::move(v));
}

SymExpr get_state(const MemoryState& mem, const FunctionEnv& fenv, const std::string& name) {
    auto it = fenv.state.find(name);
    if (it == fenv.state.end()) {
        throw ExecError(FaultKind::UnboundIdentifier, "no state variable '" + name + "'");
    }
    return read(mem, it->second.address, it->second.type, fenv.structs);
}

}  // namespace fspvm
