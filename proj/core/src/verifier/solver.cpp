#include "fspvm/solver.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <set>
#include <unordered_map>

namespace fspvm {

std::string_view sat_status_name(SatStatus s) {
    switch (s) {
    case SatStatus::Sat: return "Sat";
    case SatStatus::Unsat: return "Unsat";
    case SatStatus::Unknown: return "Unknown";
    }
    return "?";
}

namespace {

bool equality_sort(const LType& t) {
    return t.kind() == TypeKind::Address || t.kind() == TypeKind::String || t.kind() == TypeKind::Bytes;
}

bool enumerable(const LType& t) { return t.is_int() || t.is_bool() || equality_sort(t); }

SymExpr rebuild(const SymExpr& e, std::vector<SymExpr> a) {
    switch (e.kind()) {
    case SymKind::App:
        return e.is_unary() ? SymExpr::unary(e.unop(), a[0]) : SymExpr::binary(e.binop(), a[0], a[1]);
    case SymKind::MapSelect: return SymExpr::select(a[0], a[1]);
    case SymKind::FieldSel: return SymExpr::field(a[0], e.name(), e.type());
    case SymKind::Ite: return SymExpr::ite(a[0], a[1], a[2]);
    case SymKind::MapStore: return SymExpr::store(a[0], a[1], a[2]);
    case SymKind::FieldStore: return SymExpr::field_store(a[0], e.name(), a[1]);
    default: return e;
    }
}

// A variable standing for one entry of a map variable, or one field of a
// struct variable, at a fixed key.
struct Cell {
    std::string parent;
    bool is_map = true;
    Value key;
    std::string field;
    LType type;
};

using Cells = std::map<std::string, Cell>;

class Rewriter {
public:
    Rewriter(const std::map<std::string, SymExpr>& bind, Cells& cells) : bind_(bind), cells_(cells) {}

    SymExpr run(const SymExpr& e) {
        if (!e.has_vars()) {
            return e;
        }
        if (auto it = memo_.find(e.node()); it != memo_.end()) {
            return it->second;
        }
        SymExpr out = step(e);
        memo_.emplace(e.node(), out);
        return out;
    }

private:
    SymExpr step(const SymExpr& e) {
        if (e.kind() == SymKind::Var) {
            auto it = bind_.find(e.name());
            return it == bind_.end() ? e : it->second;
        }
        std::vector<SymExpr> args;
        args.reserve(e.args().size());
        bool same = true;
        for (const auto& a : e.args()) {
            args.push_back(run(a));
            same = same && args.back() == a;
        }
        if (e.kind() == SymKind::MapSelect && args[0].kind() == SymKind::Var && args[1].is_concrete()) {
            return cell(args[0], true, args[1].value(), {}, e.type());
        }
        if (e.kind() == SymKind::FieldSel && args[0].kind() == SymKind::Var) {
            return cell(args[0], false, Value(), e.name(), e.type());
        }
        return same ? e : rebuild(e, std::move(args));
    }

    SymExpr cell(const SymExpr& parent, bool is_map, const Value& key, const std::string& field, const LType& t) {
        std::string name = parent.name() + (is_map ? "[" + key.render() + "]" : "." + field);
        cells_.emplace(name, Cell{parent.name(), is_map, key, field, t});
        SymExpr v = SymExpr::var(name, t);
        if (auto it = bind_.find(name); it != bind_.end()) {
            return it->second;
        }
        return v;
    }

    const std::map<std::string, SymExpr>& bind_;
    Cells& cells_;
    std::unordered_map<const SymNode*, SymExpr> memo_;
};

void collect_constants(const Value& v, std::set<Value>& out) {
    switch (v.kind()) {
    case ValueKind::Address:
    case ValueKind::String:
    case ValueKind::Bytes:
    case ValueKind::Int: out.insert(v); break;
    case ValueKind::Map:
        collect_constants(*v.as_map().fallback, out);
        for (const auto& [k, x] : v.as_map().entries) {
            collect_constants(k, out);
            collect_constants(x, out);
        }
        break;
    case ValueKind::Struct:
        for (const auto& [n, x] : v.as_struct().fields) {
            collect_constants(x, out);
        }
        break;
    default: break;
    }
}

void collect_constants(const SymExpr& e, std::set<Value>& out, std::set<const SymNode*>& seen) {
    if (!seen.insert(e.node()).second) {
        return;
    }
    if (e.is_concrete()) {
        collect_constants(e.value(), out);
        return;
    }
    for (const auto& a : e.args()) {
        collect_constants(a, out, seen);
    }
}

struct Domain {
    std::vector<Value> values;
    bool complete = false;
};

enum class Status { Sat, Unsat, Unknown };

class Search {
public:
    Search(const SolverBudget& b, const StructTable& structs)
        : budget_(b), structs_(structs), deadline_(std::chrono::steady_clock::now() + b.timeout) {}

    SatResult solve(const std::vector<Constraint>& pc) {
        std::set<const SymNode*> seen;
        std::vector<SymExpr> cs;
        for (const auto& c : pc) {
            collect_constants(c.expr, constants_, seen);
            cs.push_back(c.expr);
        }
        SatResult r;
        Status s = Status::Unknown;
        auto reduced = reduce(cs);
        if (!reduced) {
            s = Status::Unsat;
        } else {
            s = search(*reduced);
        }
        r.steps = steps_;
        r.assignments = assignments_;
        if (s == Status::Sat) {
            r.model = build_model(pc);
            for (const auto& c : pc) {
                bool ok = false;
                try {
                    ok = eval_closed(c.expr, r.model).as_bool();
                } catch (const DomainError&) {
                }
                if (!ok) {
                    r.status = SatStatus::Unknown;
                    r.reason = "model failed re-evaluation on " + c.expr.render();
                    r.model.clear();
                    return r;
                }
            }
            r.status = SatStatus::Sat;
        } else if (s == Status::Unsat) {
            r.status = SatStatus::Unsat;
        } else {
            r.status = SatStatus::Unknown;
            r.reason = reason_.empty() ? "search incomplete" : reason_;
        }
        return r;
    }

private:
    // Substitutes the current bindings, flattens map/struct reads at fixed
    // keys into cells and simplifies. nullopt when some constraint is false.
    std::optional<std::vector<SymExpr>> reduce(const std::vector<SymExpr>& cs) {
        Rewriter rw(binding_, cells_);
        std::vector<SymExpr> out;
        for (const auto& c : cs) {
            SymExpr e = simplify(rw.run(c));
            if (e.has_vars()) {
                // Simplification can expose new fixed-key reads.
                Rewriter again(binding_, cells_);
                e = simplify(again.run(e));
            }
            if (e.is_concrete()) {
                if (!e.value().as_bool()) {
                    return std::nullopt;
                }
                continue;
            }
            if (!e.has_vars()) {
                if (!closed_true(e)) {
                    return std::nullopt;
                }
                continue;
            }
            flatten_and(e, out);
        }
        return out;
    }

    static void flatten_and(const SymExpr& e, std::vector<SymExpr>& out) {
        if (e.kind() == SymKind::App && !e.is_unary() && e.binop() == BinOp::And) {
            flatten_and(e.arg(0), out);
            flatten_and(e.arg(1), out);
            return;
        }
        out.push_back(e);
    }

    static void disjuncts(const SymExpr& e, std::vector<SymExpr>& out) {
        if (e.kind() == SymKind::App && !e.is_unary() && e.binop() == BinOp::Or) {
            disjuncts(e.arg(0), out);
            disjuncts(e.arg(1), out);
            return;
        }
        if (e.kind() == SymKind::App && e.is_unary() && e.unop() == UnOp::Not) {
            const SymExpr& a = e.arg(0);
            if (a.kind() == SymKind::App && !a.is_unary() && a.binop() == BinOp::And) {
                disjuncts(simplify(SymExpr::unary(UnOp::Not, a.arg(0))), out);
                disjuncts(simplify(SymExpr::unary(UnOp::Not, a.arg(1))), out);
                return;
            }
        }
        out.push_back(e);
    }

    static bool closed_true(const SymExpr& e) {
        try {
            return eval_closed(e, {}).as_bool();
        } catch (const DomainError&) {
            return false;
        }
    }

    bool out_of_budget() {
        if (steps_ > budget_.max_steps) {
            reason_ = "step budget of " + std::to_string(budget_.max_steps) + " exhausted";
            return true;
        }
        if (assignments_ > budget_.max_assignments) {
            reason_ = "assignment budget of " + std::to_string(budget_.max_assignments) + " exhausted";
            return true;
        }
        if (steps_ - last_clock_ >= 1024) {
            last_clock_ = steps_;
        } else {
            return false;
        }
        if (std::chrono::steady_clock::now() > deadline_) {
            reason_ = "timeout of " + std::to_string(budget_.timeout.count()) + " ms";
            return true;
        }
        return false;
    }

    Domain domain(const std::string& name, const LType& t) {
        Domain d;
        if (t.is_bool()) {
            d.values = {Value::boolean(false), Value::boolean(true)};
            d.complete = true;
        } else if (t.is_int() && t.width() <= budget_.full_range_max_width) {
            const unsigned n = 1u << t.width();
            d.values.reserve(n);
            for (unsigned i = 0; i < n; ++i) {
                d.values.push_back(Value::from_bits(t.width(), t.signedness(), Bits256(i)));
            }
            if (t.is_signed()) {
                std::stable_sort(d.values.begin(), d.values.end(), [](const Value& a, const Value& b) {
                    BigInt x = abs(a.int_value()), y = abs(b.int_value());
                    return x < y || (x == y && a.int_value() > b.int_value());
                });
            }
            d.complete = true;
        } else if (t.is_int()) {
            d = sampled(name, t);
        } else if (equality_sort(t)) {
            d = small_model(t);
        }
        return d;
    }

    Domain sampled(const std::string& name, const LType& t) {
        const int w = t.width();
        const Signedness s = t.signedness();
        std::set<Value> vals;
        auto add = [&](const BigInt& n) { vals.insert(int_wrap(w, s, n)); };
        BigInt max = t.is_signed() ? (BigInt(1) << (w - 1)) - 1 : (BigInt(1) << w) - 1;
        for (const BigInt& n : {BigInt(0), BigInt(1), BigInt(2), max, BigInt(max - 1)}) {
            add(n);
        }
        if (t.is_signed()) {
            add(-max - 1);
            add(-max);
            add(-1);
        }
        for (const Value& c : constants_) {
            if (c.kind() == ValueKind::Int && c.int_width() == w && c.int_signedness() == s) {
                add(c.int_value());
                add(c.int_value() + 1);
                add(c.int_value() - 1);
            }
        }
        std::seed_seq seq(name.begin(), name.end());
        std::mt19937_64 rng(seq);
        rng.seed(rng() ^ budget_.seed);
        for (int i = 0; i < budget_.samples_per_var; ++i) {
            Bits256 bits = 0;
            for (int k = 0; k < 4; ++k) {
                bits = (bits << 64) | Bits256(rng());
            }
            vals.insert(Value::from_bits(w, s, bits & width_mask(w)));
        }
        Domain d;
        d.values.assign(vals.begin(), vals.end());
        return d;
    }

    // Values of an equality-only sort matter only up to a permutation fixing
    // the constants: the constants, the values already used, and one fresh
    // value cover every case.
    Domain small_model(const LType& t) {
        std::set<Value> vals;
        for (const Value& c : constants_) {
            if (c.kind() != ValueKind::Int && c.type() == t) {
                vals.insert(c);
            }
        }
        for (const auto& [n, v] : assigned_) {
            if (v.kind() != ValueKind::Int && v.kind() != ValueKind::Bool && v.type() == t) {
                vals.insert(v);
            }
        }
        for (unsigned k = 1;; ++k) {
            Value fresh = fresh_value(t, k);
            if (!vals.count(fresh)) {
                vals.insert(fresh);
                break;
            }
        }
        Domain d;
        d.values.assign(vals.begin(), vals.end());
        d.complete = true;
        return d;
    }

    static Value fresh_value(const LType& t, unsigned k) {
        switch (t.kind()) {
        case TypeKind::Address: return Value::address(Bits256(k));
        case TypeKind::String: return Value::string("s" + std::to_string(k));
        default: {
            std::vector<std::uint8_t> b(static_cast<std::size_t>(t.bytes_len()), 0);
            for (std::size_t i = 0; i < b.size() && i < 4; ++i) {
                b[b.size() - 1 - i] = static_cast<std::uint8_t>(k >> (8 * i));
            }
            return Value::bytes(std::move(b));
        }
        }
    }

    std::string root_of(std::string name) const {
        for (auto it = cells_.find(name); it != cells_.end(); it = cells_.find(name)) {
            name = it->second.parent;
        }
        return name;
    }

    // A constraint next to its own negation.
    static bool complementary(const std::vector<SymExpr>& cs) {
        if (cs.size() < 2) {
            return false;
        }
        std::set<SymExpr, bool (*)(const SymExpr&, const SymExpr&)> seen(
            [](const SymExpr& a, const SymExpr& b) { return SymExpr::compare(a, b) < 0; });
        for (const auto& c : cs) {
            seen.insert(c);
        }
        // A clause all of whose disjuncts are contradicted elsewhere.
        for (const auto& c : cs) {
            std::vector<SymExpr> ds;
            disjuncts(c, ds);
            bool all = true;
            for (const auto& d : ds) {
                all = all && seen.count(simplify(SymExpr::unary(UnOp::Not, d)));
            }
            if (all) {
                return true;
            }
        }
        return false;
    }

    // Groups constraints that share a variable (cells count as their root map
    // or struct), so independent groups are searched one after another.
    std::vector<std::vector<SymExpr>> components(const std::vector<SymExpr>& cs) const {
        std::map<std::string, std::size_t> owner;
        std::vector<std::size_t> parent(cs.size());
        for (std::size_t i = 0; i < cs.size(); ++i) {
            parent[i] = i;
        }
        std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
            return parent[i] == i ? i : parent[i] = find(parent[i]);
        };
        for (std::size_t i = 0; i < cs.size(); ++i) {
            for (const auto& [n, t] : free_vars(cs[i])) {
                auto [it, fresh] = owner.emplace(root_of(n), i);
                if (!fresh) {
                    parent[find(i)] = find(it->second);
                }
            }
        }
        std::map<std::size_t, std::vector<SymExpr>> groups;
        for (std::size_t i = 0; i < cs.size(); ++i) {
            groups[find(i)].push_back(cs[i]);
        }
        std::vector<std::vector<SymExpr>> out;
        for (auto& [k, g] : groups) {
            out.push_back(std::move(g));
        }
        std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
        return out;
    }

    Status search(const std::vector<SymExpr>& cs) {
        if (cs.empty()) {
            ++assignments_;
            return Status::Sat;
        }
        if (out_of_budget()) {
            return Status::Unknown;
        }
        if (complementary(cs)) {
            return Status::Unsat;
        }
        if (auto groups = components(cs); groups.size() > 1) {
            // Bindings made by a satisfied group must not leak into the
            // caller's next candidate when the whole conjunction fails.
            const auto saved_binding = binding_;
            const auto saved_assigned = assigned_;
            auto restore = [&] {
                binding_ = saved_binding;
                assigned_ = saved_assigned;
            };
            Status all = Status::Sat;
            for (const auto& g : groups) {
                Status s = search_one(g);
                if (s == Status::Unsat) {
                    restore();
                    return s;
                }
                if (s == Status::Unknown) {
                    all = Status::Unknown;
                    if (out_of_budget()) {
                        restore();
                        return all;
                    }
                }
            }
            if (all != Status::Sat) {
                restore();
            }
            return all;
        }
        return search_one(cs);
    }

    Status search_one(const std::vector<SymExpr>& cs) {
        std::map<std::string, LType> vars;
        std::vector<std::map<std::string, LType>> per;
        for (const auto& c : cs) {
            per.push_back(free_vars(c));
            for (const auto& [n, t] : per.back()) {
                vars.emplace(n, t);
            }
        }
        std::map<std::string, Domain> doms;
        for (const auto& [n, t] : vars) {
            if (enumerable(t)) {
                doms.emplace(n, domain(n, t));
            }
        }
        if (doms.empty()) {
            reason_ = "constraints over non-enumerable values: " + cs.front().render();
            return Status::Unknown;
        }
        // Unary constraints prune their variable's domain up front.
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (per[i].size() != 1) {
                continue;
            }
            const std::string& v = per[i].begin()->first;
            auto d = doms.find(v);
            if (d == doms.end()) {
                continue;
            }
            std::vector<Value> kept;
            for (const Value& x : d->second.values) {
                ++steps_;
                bool ok = false;
                try {
                    ok = eval_closed(cs[i], {{v, x}}).as_bool();
                } catch (const DomainError&) {
                }
                if (ok) {
                    kept.push_back(x);
                }
            }
            d->second.values = std::move(kept);
            if (d->second.values.empty()) {
                if (d->second.complete) {
                    return Status::Unsat;
                }
                reason_ = "no sampled value of " + v + " satisfies " + cs[i].render();
                return Status::Unknown;
            }
            if (out_of_budget()) {
                return Status::Unknown;
            }
        }
        auto best = doms.begin();
        for (auto it = doms.begin(); it != doms.end(); ++it) {
            if (it->second.values.size() < best->second.values.size()) {
                best = it;
            }
        }
        const std::string var = best->first;
        const Domain dom = best->second;
        bool unknown = !dom.complete;
        if (unknown) {
            reason_ = "domain of " + var + " (" + vars.at(var).str() + ") is sampled";
        }
        for (const Value& x : dom.values) {
            ++steps_;
            if (out_of_budget()) {
                return Status::Unknown;
            }
            binding_[var] = SymExpr::concrete(x);
            assigned_[var] = x;
            auto next = reduce(cs);
            Status s = Status::Unsat;
            if (next) {
                if (next->empty()) {
                    ++assignments_;
                    s = Status::Sat;
                } else {
                    s = search(*next);
                }
            } else {
                ++assignments_;
            }
            if (s == Status::Sat) {
                return s;
            }
            binding_.erase(var);
            assigned_.erase(var);
            if (s == Status::Unknown) {
                unknown = true;
                if (out_of_budget()) {
                    return Status::Unknown;
                }
            }
        }
        return unknown ? Status::Unknown : Status::Unsat;
    }

    Value value_of(const std::string& name, const LType& t) {
        if (auto it = assigned_.find(name); it != assigned_.end()) {
            return it->second;
        }
        Value v = t.is_fun() ? Value() : default_value(t, structs_);
        if (t.is_mapping() || t.is_struct()) {
            for (const auto& [cname, c] : cells_) {
                if (c.parent != name) {
                    continue;
                }
                if (c.is_map && t.is_mapping()) {
                    v = v.map_set(c.key, value_of(cname, c.type));
                } else if (!c.is_map && t.is_struct()) {
                    v = v.with_field(c.field, value_of(cname, c.type));
                }
            }
        }
        return v;
    }

    Assignment build_model(const std::vector<Constraint>& pc) {
        std::map<std::string, LType> vars;
        for (const auto& c : pc) {
            for (const auto& [n, t] : free_vars(c.expr)) {
                vars.emplace(n, t);
            }
        }
        Assignment m;
        for (const auto& [n, t] : vars) {
            try {
                m[n] = value_of(n, t);
            } catch (const DomainError&) {
                // struct fields unknown to the solver: leave unassigned
            }
        }
        return m;
    }

    const SolverBudget& budget_;
    const StructTable& structs_;
    std::chrono::steady_clock::time_point deadline_;
    std::set<Value> constants_;
    std::map<std::string, SymExpr> binding_;
    std::map<std::string, Value> assigned_;
    Cells cells_;
    std::uint64_t steps_ = 0;
    std::uint64_t assignments_ = 0;
    std::uint64_t last_clock_ = 0;
    std::string reason_;
};

}  // namespace

SatResult check_feasible(const std::vector<Constraint>& pc, const SolverBudget& budget, const StructTable& structs) {
    for (const auto& c : pc) {
        if (!c.expr.type().is_bool()) {
            throw DomainError(DomainErrorKind::IllTyped, "constraint is not boolean: " + c.expr.render());
        }
    }
    return Search(budget, structs).solve(pc);
}

}  // namespace fspvm
