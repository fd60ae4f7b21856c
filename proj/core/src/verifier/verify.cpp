#include <deque>

#include "fspvm/frontend.hpp"
#include "fspvm/verifier.hpp"

namespace fspvm {

std::string_view verdict_name(VerdictKind k) {
    switch (k) {
    case VerdictKind::Proved: return "Proved";
    case VerdictKind::Falsified: return "Falsified";
    case VerdictKind::Unknown: return "Unknown";
    }
    return "?";
}

std::string_view unknown_reason_name(UnknownReason r) {
    switch (r) {
    case UnknownReason::GasExhausted: return "GasExhausted";
    case UnknownReason::SolverIncomplete: return "SolverIncomplete";
    case UnknownReason::PathBudget: return "PathBudget";
    case UnknownReason::Fault: return "Fault";
    case UnknownReason::ReplayMismatch: return "ReplayMismatch";
    }
    return "?";
}

namespace {

LType env_type(const std::string& name, int uint_width) {
    return name == "msg.sender" ? LType::address() : LType::uint(uint_width);
}

const std::vector<std::string> kEnvVars{"msg.sender", "msg.value", "now", "block.number"};

std::string branch_line(const BranchRecord& b) {
    return b.span.str() + " " + (b.taken ? "then" : "else") + " " + b.guard.render();
}

std::vector<Constraint> concat(const std::vector<Constraint>& a, const std::vector<Constraint>& b) {
    std::vector<Constraint> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

Value model_value(const Assignment& model, const std::string& name, const LType& t, const StructTable& structs) {
    if (auto it = model.find(name); it != model.end()) {
        return it->second;
    }
    return default_value(t, structs);
}

}  // namespace

EntryState symbolic_entry(const Contract& c, const BoundSpec& spec, const VerifyOptions& opts) {
    const int w = c.uint_width();
    TxParams tx;
    tx.sender = SymExpr::var("msg.sender", env_type("msg.sender", w));
    tx.value = SymExpr::var("msg.value", env_type("msg.value", w));
    tx.now = SymExpr::var("now", env_type("now", w));
    tx.block_number = SymExpr::var("block.number", env_type("block.number", w));
    tx.gas_limit = opts.gas_limit;
    tx.max_call_depth = opts.max_call_depth;
    auto [env, fenv, mem] = init_env(c, tx, init_memory(opts.mem_size));
    EntryState e{env, fenv, mem, {}, {}, {}};
    for (const auto& name : e.fenv.state_order) {
        const LType& t = e.fenv.state.at(name).type;
        if (!t.is_fun()) {
            e.mem = set_state(e.mem, e.fenv, name, SymExpr::var(name, t));
        }
    }
    for (std::size_t i = 0; i < spec.symbolic_args.size(); ++i) {
        if (spec.fixed_args[i]) {
            e.args.push_back(SymExpr::concrete(*spec.fixed_args[i]));
        } else {
            const auto& [name, t] = spec.symbolic_args[i];
            SymExpr v = SymExpr::var(name, t);
            e.args.push_back(v);
            e.locals.emplace(name, v);
        }
    }
    for (const auto& [name, t] : spec.vars) {
        e.locals.emplace(name, SymExpr::var(name, t));
    }
    for (std::size_t i = 0; i < spec.pre.size(); ++i) {
        e.pre.push_back(Constraint{eval_spec(*spec.pre[i], e, e.mem, {}), "require " + spec.spec.pre[i].text});
    }
    return e;
}

namespace {

Exploration explore_from(const EntryState& entry, const BoundSpec& spec, const VerifyOptions& opts) {
    Exploration ex;
    const auto& structs = entry.fenv.structs;
    if (!entry.pre.empty() && check_feasible(entry.pre, opts.budget, structs).status == SatStatus::Unsat) {
        ex.pre_unsat = true;
        return ex;
    }
    std::deque<std::vector<bool>> queue{{}};
    while (!queue.empty()) {
        if (ex.paths.size() >= opts.max_paths) {
            ex.path_budget_hit = true;
            break;
        }
        std::vector<bool> decisions = std::move(queue.front());
        queue.pop_front();
        ExecOptions eo;
        eo.mode = ExecMode::Symbolic;
        eo.decisions = decisions;
        ExecOutcome out = call_function(entry.mem, entry.env, entry.fenv, spec.function->name(), entry.args, eo);
        if (out.kind != OutcomeKind::Forked) {
            PathState st{out.mem, out.env, out.pc, out.branches};
            ex.paths.push_back(ExploredPath{std::move(st), std::move(out)});
            continue;
        }
        for (bool b : {true, false}) {
            SymExpr g = b ? out.fork_guard : simplify(SymExpr::unary(UnOp::Not, out.fork_guard));
            SatStatus s = SatStatus::Sat;
            if (g.is_concrete()) {
                s = g.value().as_bool() ? SatStatus::Sat : SatStatus::Unsat;
            } else {
                auto q = concat(entry.pre, out.pc);
                q.push_back(Constraint{g, "branch"});
                s = check_feasible(q, opts.budget, structs).status;
            }
            if (s == SatStatus::Unsat) {
                ++ex.pruned;
                continue;
            }
            if (s == SatStatus::Unknown) {
                ++ex.feasibility_unknown;
            }
            auto next = decisions;
            next.push_back(b);
            queue.push_back(std::move(next));
        }
    }
    return ex;
}

}  // namespace

Exploration explore(const Contract& c, const BoundSpec& spec, const VerifyOptions& opts) {
    return explore_from(symbolic_entry(c, spec, opts), spec, opts);
}

PostCheck check_post(const EntryState& entry, const BoundSpec& spec, const ExploredPath& path,
                     const SolverBudget& budget) {
    PostCheck pc;
    pc.query = concat(entry.pre, path.outcome.pc);
    const RevertPolicy policy = spec.spec.on_revert;
    auto solve = [&](const std::string& violated_note) {
        SatResult r = check_feasible(pc.query, budget, entry.fenv.structs);
        switch (r.status) {
        case SatStatus::Sat:
            pc.status = PostStatus::Violated;
            pc.model = std::move(r.model);
            pc.note = violated_note;
            break;
        case SatStatus::Unsat: pc.status = PostStatus::Holds; break;
        case SatStatus::Unknown:
            pc.status = PostStatus::Unknown;
            pc.note = r.reason;
            break;
        }
    };
    switch (path.outcome.kind) {
    case OutcomeKind::Normal: {
        if (policy == RevertPolicy::RevertRequired) {
            solve("path returns normally but the property requires a revert");
            return pc;
        }
        if (spec.post.empty()) {
            pc.status = PostStatus::Holds;
            return pc;
        }
        SymExpr all = SymExpr::concrete(Value::boolean(true));
        std::string text;
        for (std::size_t i = 0; i < spec.post.size(); ++i) {
            SymExpr p = eval_spec(*spec.post[i], entry, path.outcome.mem, path.outcome.returns);
            all = i == 0 ? p : SymExpr::binary(BinOp::And, all, p);
            text += (i ? " && " : "") + spec.spec.post[i].text;
        }
        SymExpr neg = simplify(SymExpr::unary(UnOp::Not, all));
        if (neg.is_concrete() && !neg.value().as_bool()) {
            pc.status = PostStatus::Holds;
            return pc;
        }
        pc.query.push_back(Constraint{neg, "not (" + text + ")"});
        solve("postcondition can be false");
        return pc;
    }
    case OutcomeKind::Reverted:
        if (policy == RevertPolicy::PostMustHold) {
            solve("transaction can revert (" + path.outcome.revert_reason + ")");
            return pc;
        }
        pc.status = PostStatus::Holds;
        return pc;
    default:
        pc.note = "path ended with " + std::string(outcome_name(path.outcome.kind));
        return pc;
    }
}

Replay replay(const Contract& c, const BoundSpec& spec, const Assignment& model, const VerifyOptions& opts) {
    const int w = c.uint_width();
    const StructTable& structs = c.structs();
    TxParams tx;
    tx.sender = SymExpr::concrete(model_value(model, "msg.sender", env_type("msg.sender", w), structs));
    tx.value = SymExpr::concrete(model_value(model, "msg.value", env_type("msg.value", w), structs));
    tx.now = SymExpr::concrete(model_value(model, "now", env_type("now", w), structs));
    tx.block_number = SymExpr::concrete(model_value(model, "block.number", env_type("block.number", w), structs));
    tx.gas_limit = opts.gas_limit;
    tx.max_call_depth = opts.max_call_depth;
    auto [env, fenv, mem] = init_env(c, tx, init_memory(opts.mem_size));
    EntryState e{env, fenv, mem, {}, {}, {}};
    for (const auto& name : e.fenv.state_order) {
        if (auto it = model.find(name); it != model.end()) {
            e.mem = set_state(e.mem, e.fenv, name, SymExpr::concrete(it->second));
        }
    }
    for (std::size_t i = 0; i < spec.symbolic_args.size(); ++i) {
        if (spec.fixed_args[i]) {
            e.args.push_back(SymExpr::concrete(*spec.fixed_args[i]));
        } else {
            const auto& [name, t] = spec.symbolic_args[i];
            SymExpr v = SymExpr::concrete(model_value(model, name, t, structs));
            e.args.push_back(v);
            e.locals.emplace(name, v);
        }
    }
    for (const auto& [name, t] : spec.vars) {
        e.locals.emplace(name, SymExpr::concrete(model_value(model, name, t, structs)));
    }
    Replay r;
    r.outcome = call_function(e.mem, e.env, e.fenv, spec.function->name(), e.args, ExecOptions{});
    for (std::size_t i = 0; i < spec.pre.size(); ++i) {
        Value v = eval_closed(eval_spec(*spec.pre[i], e, e.mem, {}), {});
        if (!v.as_bool()) {
            // the model does not satisfy the precondition: nothing is violated
            return r;
        }
    }
    const RevertPolicy policy = spec.spec.on_revert;
    if (r.outcome.kind == OutcomeKind::Normal) {
        if (policy == RevertPolicy::RevertRequired) {
            r.violated.push_back("on_revert require");
            return r;
        }
        for (std::size_t i = 0; i < spec.post.size(); ++i) {
            Value v = eval_closed(eval_spec(*spec.post[i], e, r.outcome.mem, r.outcome.returns), {});
            if (!v.as_bool()) {
                r.violated.push_back(spec.spec.post[i].text);
            }
        }
    } else if (r.outcome.kind == OutcomeKind::Reverted && policy == RevertPolicy::PostMustHold) {
        r.violated.push_back("on_revert forbid");
    }
    return r;
}

Verdict verify(const Contract& c, const PropertySpec& pspec, const VerifyOptions& opts) {
    BoundSpec spec = bind_spec(c, pspec);
    Verdict v;
    v.property = pspec.name;
    v.entry = pspec.entry;
    v.gas_limit = opts.gas_limit;
    EntryState entry = symbolic_entry(c, spec, opts);
    Exploration ex = explore_from(entry, spec, opts);
    v.pruned = ex.pruned;
    if (ex.pre_unsat) {
        v.kind = VerdictKind::Proved;
        return v;
    }
    for (std::size_t i = 0; i < ex.paths.size(); ++i) {
        const ExploredPath& p = ex.paths[i];
        PathSummary s;
        s.index = i;
        for (const auto& k : p.outcome.pc) {
            s.pc.push_back(k.expr.render());
        }
        for (const auto& b : p.outcome.branches) {
            s.decisions.push_back(b.taken);
        }
        s.outcome = p.outcome.kind;
        s.gas_used = p.outcome.env.gas_used;
        if (p.outcome.kind == OutcomeKind::OutOfGas) {
            s.status = "gas-exhausted";
            v.unknowns.push_back(UnknownDetail{UnknownReason::GasExhausted,
                                               "gas limit " + std::to_string(opts.gas_limit) + " reached", i});
            v.paths.push_back(std::move(s));
            continue;
        }
        if (p.outcome.kind == OutcomeKind::Fault) {
            s.status = "fault";
            s.note = std::string(fault_name(p.outcome.fault)) + ": " + p.outcome.fault_message;
            v.unknowns.push_back(UnknownDetail{UnknownReason::Fault, p.outcome.where.str() + " " + s.note, i});
            v.paths.push_back(std::move(s));
            continue;
        }
        PostCheck pc = check_post(entry, spec, p, opts.budget);
        s.note = pc.note;
        if (pc.status == PostStatus::Holds) {
            s.status = "holds";
            v.paths.push_back(std::move(s));
            continue;
        }
        if (pc.status == PostStatus::Unknown) {
            s.status = "unknown";
            v.unknowns.push_back(UnknownDetail{UnknownReason::SolverIncomplete, pc.note, i});
            v.open_queries.emplace_back(i, pc.query);
            v.paths.push_back(std::move(s));
            continue;
        }
        s.status = "violated";
        v.paths.push_back(std::move(s));
        Replay r = replay(c, spec, pc.model, opts);
        Counterexample cx;
        cx.path = i;
        cx.model = pc.model;
        for (const auto& b : p.outcome.branches) {
            cx.trace.push_back(branch_line(b));
        }
        cx.replay_outcome = r.outcome.kind;
        cx.violated = r.violated;
        cx.final_memory = dump_memory(r.outcome.mem);
        cx.replay_confirmed = !r.violated.empty();
        if (cx.replay_confirmed) {
            v.kind = VerdictKind::Falsified;
            v.counterexample = std::move(cx);
            v.unknowns.clear();
            return v;
        }
        v.unknowns.push_back(UnknownDetail{UnknownReason::ReplayMismatch,
                                           "concrete replay of the model did not violate the property", i});
        if (!v.counterexample) {
            v.counterexample = std::move(cx);
        }
    }
    if (ex.path_budget_hit) {
        v.unknowns.push_back(UnknownDetail{UnknownReason::PathBudget,
                                           "stopped after " + std::to_string(opts.max_paths) + " paths", std::nullopt});
    }
    v.kind = v.unknowns.empty() ? VerdictKind::Proved : VerdictKind::Unknown;
    return v;
}

}  // namespace fspvm
