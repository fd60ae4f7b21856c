#pragma once

// Exhaustive concrete oracle for properties of small contracts: every
// combination of scalar state and parameter values is executed by the
// concrete interpreter and the spec clauses are evaluated directly on the
// resulting values.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fspvm/verifier.hpp"

namespace fspvm::oracle {

struct Outcome {
    bool violated = false;
    bool out_of_gas = false;
    bool fault = false;
    std::size_t runs = 0;
    Assignment witness;  // first violating input
};

struct Input {
    std::string name;
    LType type;
    bool state = false;
};

inline Value eval(const Expr& e, const FunctionEnv& fenv, const MemoryState& entry, const MemoryState& final_mem,
                  const std::map<std::string, Value>& locals, const std::vector<SymExpr>& returns, bool in_old) {
    auto go = [&](const Expr& x) { return eval(x, fenv, entry, final_mem, locals, returns, in_old); };
    switch (e.kind()) {
    case ExprKind::Const: return e.value();
    case ExprKind::Var:
        if (e.scope() == VarScope::State) {
            return get_state(in_old ? entry : final_mem, fenv, e.name()).value();
        }
        if (auto it = locals.find(e.name()); it != locals.end()) {
            return it->second;
        }
        if (e.name().rfind("result_", 0) == 0) {
            return returns.at(std::stoul(e.name().substr(7))).value();
        }
        throw std::runtime_error("oracle: unbound " + e.name());
    case ExprKind::Bop:
        if (e.binop() == BinOp::And) {
            return go(*e.arg(0)).as_bool() ? go(*e.arg(1)) : Value::boolean(false);
        }
        if (e.binop() == BinOp::Or) {
            return go(*e.arg(0)).as_bool() ? Value::boolean(true) : go(*e.arg(1));
        }
        return apply_binop(e.binop(), go(*e.arg(0)), go(*e.arg(1)));
    case ExprKind::Uop: return apply_unop(e.unop(), go(*e.arg(0)));
    case ExprKind::Map: return go(*e.arg(0)).map_get(go(*e.arg(1)));
    case ExprKind::Field: return go(*e.arg(0)).field(e.name());
    case ExprKind::Old: return eval(*e.arg(0), fenv, entry, final_mem, locals, returns, true);
    case ExprKind::Call: break;
    }
    throw std::runtime_error("oracle: unsupported clause");
}

inline std::vector<Value> domain(const LType& t) {
    std::vector<Value> out;
    if (t.is_bool()) {
        out = {Value::boolean(false), Value::boolean(true)};
    } else if (t.is_int() && t.width() <= 8) {
        for (unsigned i = 0; i < (1u << t.width()); ++i) {
            out.push_back(Value::from_bits(t.width(), t.signedness(), Bits256(i)));
        }
    } else {
        throw std::runtime_error("oracle: cannot enumerate " + t.str());
    }
    return out;
}

/// Enumerates all inputs of `spec.entry`. Scalar state only; the transaction
/// fields stay at their zero defaults, so the contract must not read them.
/// With `first_only` the enumeration ends at the first violation.
inline Outcome exhaustive(const Contract& c, const BoundSpec& spec, std::uint64_t gas_limit,
                          bool first_only = false) {
    TxParams tx;
    tx.gas_limit = gas_limit;
    auto [env, fenv, mem0] = init_env(c, tx);
    std::vector<Input> inputs;
    for (const auto& name : fenv.state_order) {
        inputs.push_back(Input{name, fenv.state.at(name).type, true});
    }
    for (std::size_t i = 0; i < spec.symbolic_args.size(); ++i) {
        if (!spec.fixed_args[i]) {
            inputs.push_back(Input{spec.symbolic_args[i].first, spec.symbolic_args[i].second, false});
        }
    }
    for (const auto& [name, t] : spec.vars) {
        inputs.push_back(Input{name, t, false});
    }
    std::vector<std::vector<Value>> doms;
    for (const auto& in : inputs) {
        doms.push_back(domain(in.type));
    }
    Outcome out;
    std::vector<std::size_t> idx(inputs.size(), 0);
    const RevertPolicy policy = spec.spec.on_revert;
    while (true) {
        MemoryState mem = mem0;
        std::map<std::string, Value> locals;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            const Value& v = doms[i][idx[i]];
            if (inputs[i].state) {
                mem = set_state(mem, fenv, inputs[i].name, SymExpr::concrete(v));
            } else {
                locals.emplace(inputs[i].name, v);
            }
        }
        bool pre = true;
        for (const auto& p : spec.pre) {
            pre = pre && eval(*p, fenv, mem, mem, locals, {}, false).as_bool();
        }
        if (pre) {
            ++out.runs;
            std::vector<SymExpr> args;
            for (std::size_t i = 0; i < spec.symbolic_args.size(); ++i) {
                args.push_back(SymExpr::concrete(spec.fixed_args[i] ? *spec.fixed_args[i]
                                                                     : locals.at(spec.symbolic_args[i].first)));
            }
            ExecOutcome r = call_function(mem, env, fenv, spec.function->name(), args);
            bool bad = false;
            if (r.kind == OutcomeKind::OutOfGas) {
                out.out_of_gas = true;
            } else if (r.kind == OutcomeKind::Fault) {
                out.fault = true;
            } else if (r.kind == OutcomeKind::Reverted) {
                bad = policy == RevertPolicy::PostMustHold;
            } else if (policy == RevertPolicy::RevertRequired) {
                bad = true;
            } else {
                for (const auto& p : spec.post) {
                    bad = bad || !eval(*p, fenv, mem, r.mem, locals, r.returns, false).as_bool();
                }
            }
            if (bad && !out.violated) {
                out.violated = true;
                for (std::size_t i = 0; i < inputs.size(); ++i) {
                    out.witness[inputs[i].name] = doms[i][idx[i]];
                }
                if (first_only) {
                    break;
                }
            }
        }
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == doms[k].size()) {
            idx[k++] = 0;
        }
        if (k == idx.size()) {
            break;
        }
    }
    return out;
}

}  // namespace fspvm::oracle
