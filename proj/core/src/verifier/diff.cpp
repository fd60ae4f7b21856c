#include <random>

#include <nlohmann/json.hpp>

#include "fspvm/verifier.hpp"

namespace fspvm {

namespace {

class InputGen {
public:
    InputGen(std::uint64_t seed, const StructTable& structs) : rng_(seed), structs_(structs) {}

    Value value(const LType& t) {
        switch (t.kind()) {
        case TypeKind::Int: {
            const int w = t.width();
            BigInt max = (BigInt(1) << w) - 1;
            BigInt n;
            switch (pick(6)) {
            case 0: n = 0; break;
            case 1: n = 1; break;
            case 2: n = max; break;
            case 3: n = max - 1; break;
            default: n = uniform_bits(w); break;
            }
            return Value::from_bits(w, t.signedness(), Bits256(n));
        }
        case TypeKind::Bool: return Value::boolean(pick(2) == 1);
        case TypeKind::Address: return Value::address(Bits256(1 + pick(4)));
        case TypeKind::String: {
            static const char* pool[] = {"", "a", "b"};
            return Value::string(pool[pick(3)]);
        }
        case TypeKind::Bytes: {
            std::vector<std::uint8_t> b(static_cast<std::size_t>(t.bytes_len()));
            for (auto& x : b) {
                x = static_cast<std::uint8_t>(pick(256));
            }
            return Value::bytes(std::move(b));
        }
        case TypeKind::Mapping: {
            Value m = default_value(t, structs_);
            const unsigned n = pick(4);
            for (unsigned i = 0; i < n; ++i) {
                m = m.map_set(value(t.key()), value(t.value()));
            }
            return m;
        }
        case TypeKind::Struct: {
            Value s = default_value(t, structs_);
            for (const auto& [name, ft] : structs_.at(t.struct_name())) {
                if (!ft.is_fun()) {
                    s = s.with_field(name, value(ft));
                }
            }
            return s;
        }
        default: return default_value(t, structs_);
        }
    }

    unsigned pick(unsigned n) { return std::uniform_int_distribution<unsigned>(0, n - 1)(rng_); }

private:
    BigInt uniform_bits(int w) {
        BigInt n = 0;
        for (int i = 0; i < w; i += 32) {
            n = (n << 32) | BigInt(static_cast<std::uint32_t>(rng_()));
        }
        return n & ((BigInt(1) << w) - 1);
    }

    std::mt19937_64 rng_;
    const StructTable& structs_;
};

std::uint64_t case_seed(std::uint64_t seed, std::size_t i) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (i + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::string describe(const ExecOutcome& o) {
    std::string s(outcome_name(o.kind));
    if (o.kind == OutcomeKind::Fault) {
        s += " " + std::string(fault_name(o.fault));
    }
    s += " gas=" + std::to_string(o.env.gas_used);
    if (!o.returns.empty()) {
        s += " returns=(";
        for (std::size_t i = 0; i < o.returns.size(); ++i) {
            s += (i ? ", " : "") + o.returns[i].render();
        }
        s += ")";
    }
    return s;
}

std::string compare_outcomes(const ExecOutcome& c, const ExecOutcome& s) {
    if (c.kind != s.kind) {
        return "outcome differs";
    }
    if (c.env.gas_used != s.env.gas_used) {
        return "gas differs";
    }
    if (c.returns.size() != s.returns.size()) {
        return "return arity differs";
    }
    for (std::size_t i = 0; i < c.returns.size(); ++i) {
        if (!(simplify(c.returns[i]) == simplify(s.returns[i]))) {
            return "return " + std::to_string(i) + " differs";
        }
    }
    if (!mem_equal(c.mem, s.mem)) {
        auto d = mem_diff(c.mem, s.mem);
        std::string where = d.empty() || d.front().size_mismatch ? "size" : d.front().address.str();
        return "memory differs at " + where;
    }
    return {};
}

}  // namespace

DiffReport diff_check(const Contract& c, const std::string& entry, std::size_t n_cases, std::uint64_t seed,
                      const DiffOptions& opts) {
    DiffReport rep;
    rep.contract = c.name();
    rep.entry = entry;
    rep.cases = n_cases;
    std::vector<const FunctionDef*> targets;
    if (entry.empty()) {
        for (const auto& f : c.functions()) {
            targets.push_back(&f);
        }
    } else if (const FunctionDef* f = c.find_function(entry)) {
        targets.push_back(f);
    } else {
        throw ExecError(FaultKind::UnknownFunction, "no function '" + entry + "'");
    }
    if (targets.empty()) {
        rep.cases = 0;
        return rep;
    }
    const LType uint_t = LType::uint(c.uint_width());
    for (std::size_t i = 0; i < n_cases; ++i) {
        const std::uint64_t s = case_seed(seed, i);
        InputGen gen(s, c.structs());
        const FunctionDef& f = *targets[i % targets.size()];
        TxParams tx;
        tx.sender = SymExpr::concrete(gen.value(LType::address()));
        tx.value = SymExpr::concrete(gen.value(uint_t));
        tx.now = SymExpr::concrete(gen.value(uint_t));
        tx.block_number = SymExpr::concrete(gen.value(uint_t));
        tx.gas_limit = opts.gas_limit;
        tx.max_call_depth = opts.max_call_depth;
        auto [env, fenv, mem] = init_env(c, tx, init_memory(opts.mem_size));
        for (const auto& name : fenv.state_order) {
            const LType& t = fenv.state.at(name).type;
            if (!t.is_fun() && gen.pick(4) != 0) {
                mem = set_state(mem, fenv, name, SymExpr::concrete(gen.value(t)));
            }
        }
        std::vector<SymExpr> args;
        for (const auto& p : f.params()) {
            args.push_back(SymExpr::concrete(gen.value(p.type)));
        }
        ExecOptions concrete;
        ExecOptions symbolic;
        symbolic.mode = ExecMode::Symbolic;
        symbolic.symbolic_binop_hook = opts.symbolic_binop_hook;
        ExecOutcome a = call_function(mem, env, fenv, f.name(), args, concrete);
        ExecOutcome b = call_function(mem, env, fenv, f.name(), args, symbolic);
        ++rep.outcomes[std::string(outcome_name(a.kind))];
        if (a.kind == OutcomeKind::Fault) {
            ++rep.faults[std::string(fault_name(a.fault))];
        }
        std::string why = compare_outcomes(a, b);
        if (!why.empty()) {
            rep.divergences.push_back(
                Divergence{i, s, f.name(), why + ": concrete " + describe(a) + " vs symbolic " + describe(b)});
        }
    }
    return rep;
}

nlohmann::json diff_to_json(const DiffReport& r) {
    nlohmann::json j;
    j["contract"] = r.contract;
    j["entry"] = r.entry;
    j["cases"] = r.cases;
    j["outcomes"] = r.outcomes;
    j["faults"] = r.faults;
    j["divergences"] = nlohmann::json::array();
    for (const auto& d : r.divergences) {
        j["divergences"].push_back(
            {{"case", d.case_index}, {"seed", d.seed}, {"function", d.function}, {"details", d.details}});
    }
    return j;
}

}  // namespace fspvm
