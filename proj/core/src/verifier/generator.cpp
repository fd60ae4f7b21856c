#include "fspvm/generator.hpp"

#include <random>
#include <sstream>

#include "fspvm/frontend.hpp"

namespace fspvm {

namespace {

enum class Ty { Uint, Bool, Addr };

const char* ty_name(Ty t) {
    switch (t) {
    case Ty::Uint: return "uint";
    case Ty::Bool: return "bool";
    case Ty::Addr: return "address";
    }
    return "?";
}

struct Var {
    std::string name;
    Ty ty;
    bool assignable = true;
};

struct Callee {
    std::string name;
    std::vector<Ty> params;
};

class Gen {
public:
    Gen(std::uint64_t seed, int size, const GenOptions& o) : rng_(seed), opts_(o), budget_(size) {}

    std::string contract() {
        out_ << "pragma solidity ^0.4.24;\n\ncontract Gen {\n";
        if (budget_ <= 0) {
            out_ << "    function f() public {\n    }\n}\n";
            return out_.str();
        }
        if (opts_.verification) {
            verification_state();
        } else {
            general_state();
        }
        const bool with_rec = chance(50);
        if (with_rec) {
            out_ << "\n    function rec(uint n) public returns (uint) {\n"
                 << "        if (n == 0) {\n            return " << lit() << ";\n        }\n"
                 << "        return rec(n - 1) + " << lit() << ";\n    }\n";
            callees_.push_back(Callee{"rec", {Ty::Uint}});
        }
        const int helpers = opts_.verification ? pick(2) : 1 + pick(3);
        const int share = std::max(1, budget_ / (helpers + 1));
        for (int h = 0; h < helpers; ++h) {
            std::vector<Var> ps;
            for (int i = 0, n = pick(3); i < n; ++i) {
                ps.push_back(Var{"q" + std::to_string(i), chance(70) ? Ty::Uint : pick_ty_general()});
            }
            function("g" + std::to_string(h), ps, share);
        }
        function("f", entry_params_, std::max(1, budget_ - helpers * share));
        out_ << "}\n";
        return out_.str();
    }

private:
    // ------------------------------------------------------------ helpers

    int pick(int n) { return n <= 1 ? 0 : static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
    bool chance(int percent) { return pick(100) < percent; }

    Ty pick_ty_general() {
        if (opts_.verification) {
            return chance(60) ? Ty::Uint : Ty::Bool;
        }
        int r = pick(10);
        return r < 6 ? Ty::Uint : r < 9 ? Ty::Bool : Ty::Addr;
    }

    std::string lit() {
        const int w = opts_.uint_width;
        if (chance(85)) {
            return std::to_string(pick(10));
        }
        if (w <= 16) {
            return std::to_string(pick(1 << w));
        }
        BigInt n = 0;
        for (int i = 0; i < w; i += 32) {
            n = (n << 32) | BigInt(static_cast<std::uint32_t>(rng_()));
        }
        n &= (BigInt(1) << w) - 1;
        return n.str();
    }

    std::string pad() const { return std::string(static_cast<std::size_t>(4 * indent_), ' '); }

    std::vector<const Var*> visible(Ty t, bool need_assignable) const {
        std::vector<const Var*> out;
        for (const auto& v : state_) {
            if (v.ty == t && (!need_assignable || v.assignable)) {
                out.push_back(&v);
            }
        }
        for (const auto& s : scopes_) {
            for (const auto& v : s) {
                if (v.ty == t && (!need_assignable || v.assignable)) {
                    out.push_back(&v);
                }
            }
        }
        return out;
    }

    // ------------------------------------------------------------ declarations

    void general_state() {
        has_umap_ = chance(70);
        has_bmap_ = chance(40);
        has_struct_ = chance(40);
        if (has_struct_) {
            out_ << "    struct P {\n        uint a;\n        bool b;\n    }\n\n";
        }
        for (int i = 0, n = 1 + pick(4); i < n; ++i) {
            Ty t = pick_ty_general();
            state_.push_back(Var{"s" + std::to_string(i), t});
            out_ << "    " << ty_name(t) << (chance(50) ? " public " : " ") << state_.back().name << ";\n";
        }
        if (has_umap_) {
            out_ << "    mapping(address => uint) mu;\n";
        }
        if (has_bmap_) {
            out_ << "    mapping(uint => bool) mb;\n";
        }
        if (has_struct_) {
            out_ << "    P ps;\n";
        }
        for (int i = 0, n = pick(3); i < n; ++i) {
            entry_params_.push_back(Var{"p" + std::to_string(i), pick_ty_general()});
        }
    }

    void verification_state() {
        int r = pick(100);
        const int ints = r < 15 ? 0 : r < 85 ? 1 : 2;
        const int bools = ints == 2 ? pick(2) : pick(3);
        std::vector<Ty> inputs(static_cast<std::size_t>(ints), Ty::Uint);
        inputs.insert(inputs.end(), static_cast<std::size_t>(bools), Ty::Bool);
        int si = 0;
        int pi = 0;
        for (Ty t : inputs) {
            if (chance(50)) {
                state_.push_back(Var{"s" + std::to_string(si++), t});
                out_ << "    " << ty_name(t) << " public " << state_.back().name << ";\n";
            } else {
                entry_params_.push_back(Var{"p" + std::to_string(pi++), t});
            }
        }
        if (state_.empty() && !entry_params_.empty()) {
            state_.push_back(Var{"s0", entry_params_.back().ty});
            entry_params_.pop_back();
            out_ << "    " << ty_name(state_.back().ty) << " public s0;\n";
        } else if (state_.empty()) {
            // a state variable fed only from the function body
            state_.push_back(Var{"s0", Ty::Uint});
            out_ << "    uint public s0;\n";
        }
    }

    void function(const std::string& name, const std::vector<Var>& params, int budget) {
        out_ << "\n    function " << name << "(";
        for (std::size_t i = 0; i < params.size(); ++i) {
            out_ << (i ? ", " : "") << ty_name(params[i].ty) << " " << params[i].name;
        }
        out_ << ") public returns (uint) {\n";
        scopes_.assign(1, params);
        indent_ = 2;
        fuel_ = budget;
        loops_ = 0;
        while (fuel_ > 0) {
            stmt(0);
        }
        out_ << pad() << "return " << uint_expr(2) << ";\n    }\n";
        Callee c{name, {}};
        for (const auto& p : params) {
            c.params.push_back(p.ty);
        }
        callees_.push_back(std::move(c));
        scopes_.clear();
    }

    // ------------------------------------------------------------ statements

    void block(int depth) {
        scopes_.emplace_back();
        ++indent_;
        for (int i = 0, n = 1 + pick(3); i < n && fuel_ > 0; ++i) {
            stmt(depth + 1);
        }
        --indent_;
        scopes_.pop_back();
    }

    void stmt(int depth) {
        --fuel_;
        const bool nest = depth < 2;
        int r = pick(100);
        if (r < 30) {
            assign();
        } else if (r < 45) {
            declare();
        } else if (r < 60 && nest) {
            out_ << pad() << "if (" << bool_expr(2) << ") {\n";
            block(depth);
            if (chance(50)) {
                out_ << pad() << "} else {\n";
                block(depth);
            }
            out_ << pad() << "}\n";
        } else if (r < 68 && nest && loops_ < 2) {
            ++loops_;
            std::string i = "i" + std::to_string(fresh_++);
            out_ << pad() << "for (uint " << i << " = 0; " << i << " < " << 1 + pick(3) << "; " << i << "++) {\n";
            scopes_.push_back({Var{i, Ty::Uint, false}});
            block(depth);
            scopes_.pop_back();
            out_ << pad() << "}\n";
        } else if (r < 75) {
            out_ << pad() << "require(" << bool_expr(1) << ");\n";
        } else if (r < 80) {
            out_ << pad() << "if (" << bool_expr(1) << ") {\n"
                 << pad() << "    " << (chance(50) ? "throw;" : "return " + uint_expr(1) + ";") << "\n"
                 << pad() << "}\n";
        } else if (r < 90 && (has_umap_ || has_bmap_)) {
            if (has_umap_ && (!has_bmap_ || chance(60))) {
                out_ << pad() << "mu[" << addr_expr() << "] " << (chance(30) ? "+=" : "=") << " " << uint_expr(2)
                     << ";\n";
            } else {
                out_ << pad() << "mb[" << uint_expr(1) << "] = " << bool_expr(1) << ";\n";
            }
        } else if (r < 95 && has_struct_) {
            if (chance(60)) {
                out_ << pad() << "ps.a = " << uint_expr(2) << ";\n";
            } else {
                out_ << pad() << "ps.b = " << bool_expr(1) << ";\n";
            }
        } else {
            assign();
        }
    }

    void assign() {
        Ty t = chance(70) ? Ty::Uint : pick_ty_general();
        auto targets = visible(t, true);
        if (targets.empty()) {
            targets = visible(Ty::Uint, true);
            t = Ty::Uint;
        }
        if (targets.empty()) {
            declare();
            return;
        }
        const Var& v = *targets[static_cast<std::size_t>(pick(static_cast<int>(targets.size())))];
        if (t == Ty::Uint && chance(25)) {
            static const char* ops[] = {"+=", "-=", "*="};
            out_ << pad() << v.name << " " << ops[pick(3)] << " " << uint_expr(2) << ";\n";
            return;
        }
        out_ << pad() << v.name << " = " << expr(t, 2) << ";\n";
    }

    void declare() {
        Ty t = pick_ty_general();
        std::string name = "t" + std::to_string(fresh_++);
        out_ << pad() << ty_name(t) << " " << name << " = " << expr(t, 2) << ";\n";
        scopes_.back().push_back(Var{name, t});
    }

    // ------------------------------------------------------------ expressions

    std::string expr(Ty t, int depth) {
        switch (t) {
        case Ty::Uint: return uint_expr(depth);
        case Ty::Bool: return bool_expr(depth);
        case Ty::Addr: return addr_expr();
        }
        return "0";
    }

    std::string uint_expr(int depth) {
        if (depth <= 0 || chance(35)) {
            auto vs = visible(Ty::Uint, false);
            int r = pick(10);
            if (r < 5 && !vs.empty()) {
                return vs[static_cast<std::size_t>(pick(static_cast<int>(vs.size())))]->name;
            }
            if (r < 7 && has_umap_) {
                return "mu[" + addr_expr() + "]";
            }
            if (r < 8 && has_struct_) {
                return "ps.a";
            }
            return lit();
        }
        int r = pick(12);
        if (r < 9) {
            static const char* ops[] = {"+", "-", "*", "/", "%", "+", "-", "+", "*"};
            return "(" + uint_expr(depth - 1) + " " + ops[r] + " " + uint_expr(depth - 1) + ")";
        }
        if (!callees_.empty() && fuel_ >= 0) {
            const Callee& c = callees_[static_cast<std::size_t>(pick(static_cast<int>(callees_.size())))];
            std::string s = c.name + "(";
            for (std::size_t i = 0; i < c.params.size(); ++i) {
                std::string a = expr(c.params[i], 0);
                if (c.name == "rec") {
                    a = "(" + a + " % 4)";
                }
                s += (i ? ", " : "") + a;
            }
            return s + ")";
        }
        return "(" + uint_expr(depth - 1) + " + " + lit() + ")";
    }

    std::string bool_expr(int depth) {
        if (depth <= 0 || chance(30)) {
            auto vs = visible(Ty::Bool, false);
            int r = pick(10);
            if (r < 5 && !vs.empty()) {
                return vs[static_cast<std::size_t>(pick(static_cast<int>(vs.size())))]->name;
            }
            if (r < 7 && has_bmap_) {
                return "mb[" + uint_expr(0) + "]";
            }
            if (r < 8 && has_struct_) {
                return "ps.b";
            }
            static const char* cmps[] = {"<", "<=", ">", ">=", "==", "!="};
            return "(" + uint_expr(0) + " " + cmps[pick(6)] + " " + uint_expr(0) + ")";
        }
        int r = pick(10);
        if (r < 5) {
            static const char* cmps[] = {"<", "<=", ">", ">=", "==", "!="};
            return "(" + uint_expr(depth - 1) + " " + cmps[pick(6)] + " " + uint_expr(depth - 1) + ")";
        }
        if (r < 6) {
            return "!" + bool_expr(0);
        }
        if (r < 8) {
            return "(" + bool_expr(depth - 1) + " && " + bool_expr(depth - 1) + ")";
        }
        if (r < 9 || opts_.verification) {
            return "(" + bool_expr(depth - 1) + " || " + bool_expr(depth - 1) + ")";
        }
        return "(" + addr_expr() + (chance(50) ? " == " : " != ") + addr_expr() + ")";
    }

    std::string addr_expr() {
        auto vs = visible(Ty::Addr, false);
        int r = pick(10);
        if (r < 4 && !vs.empty()) {
            return vs[static_cast<std::size_t>(pick(static_cast<int>(vs.size())))]->name;
        }
        if (r < 7 && !opts_.verification) {
            return "msg.sender";
        }
        return "address(" + std::to_string(pick(5)) + ")";
    }

    std::mt19937_64 rng_;
    GenOptions opts_;
    int budget_;
    std::ostringstream out_;
    std::vector<Var> state_;
    std::vector<Var> entry_params_;
    std::vector<std::vector<Var>> scopes_;
    std::vector<Callee> callees_;
    bool has_umap_ = false;
    bool has_bmap_ = false;
    bool has_struct_ = false;
    int indent_ = 0;
    int fuel_ = 0;
    int loops_ = 0;
    int fresh_ = 0;
};

}  // namespace

std::string generate_source(std::uint64_t seed, int size, const GenOptions& opts) {
    return Gen(seed, size, opts).contract();
}

Contract program_generator(std::uint64_t seed, int size, const GenOptions& opts) {
    return typecheck_contract(parse_solidity(generate_source(seed, size, opts), "gen.sol"),
                              TypeOptions{opts.uint_width});
}

std::string generate_spec(std::uint64_t seed, const Contract& c, const std::string& entry) {
    std::mt19937_64 rng(seed);
    auto pick = [&](int n) { return n <= 1 ? 0 : static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    const FunctionDef* f = c.find_function(entry);
    if (!f) {
        throw std::invalid_argument("no function " + entry);
    }
    auto konst = [&] {
        if (pick(4) == 0) {
            BigInt m = (BigInt(1) << c.uint_width()) - 1;
            return BigInt(m - pick(3)).str();
        }
        return std::to_string(pick(12));
    };
    std::vector<std::string> ints;
    std::vector<std::string> bools;
    std::vector<std::string> entry_ints;
    std::vector<std::string> entry_bools;
    for (const auto& s : c.state()) {
        if (s->kind() != StmtKind::Var) {
            continue;
        }
        if (s->type().is_int()) {
            ints.push_back(s->name());
            ints.push_back("old(" + s->name() + ")");
            entry_ints.push_back(s->name());
        } else if (s->type().is_bool()) {
            bools.push_back(s->name());
            bools.push_back("old(" + s->name() + ")");
            entry_bools.push_back(s->name());
        }
    }
    std::string args;
    for (const auto& p : f->params()) {
        args += (args.empty() ? "" : ", ") + p.name;
        if (p.type.is_int()) {
            ints.push_back(p.name);
            entry_ints.push_back(p.name);
        } else if (p.type.is_bool()) {
            bools.push_back(p.name);
            entry_bools.push_back(p.name);
        }
    }
    if (!f->rets().empty() && f->rets()[0].is_int()) {
        ints.push_back("result_0");
        ints.push_back("result_0");
    }
    static const char* cmps[] = {"<", "<=", ">", ">=", "==", "!="};
    auto int_atom = [&](const std::vector<std::string>& from) {
        return from.empty() || pick(3) == 0 ? konst() : from[static_cast<std::size_t>(pick(static_cast<int>(from.size())))];
    };
    auto clause = [&](const std::vector<std::string>& is, const std::vector<std::string>& bs) {
        if (!bs.empty() && pick(4) == 0) {
            std::string b = bs[static_cast<std::size_t>(pick(static_cast<int>(bs.size())))];
            return pick(2) ? b : "!" + b;
        }
        std::string a = int_atom(is);
        std::string b = int_atom(is);
        if (!is.empty() && std::isdigit(static_cast<unsigned char>(a[0])) &&
            std::isdigit(static_cast<unsigned char>(b[0]))) {
            a = is[static_cast<std::size_t>(pick(static_cast<int>(is.size())))];
        }
        return a + " " + cmps[pick(6)] + " " + b;
    };
    std::ostringstream out;
    out << "property gen_" << seed << "\nentry " << entry << "(" << args << ")\n";
    if (pick(5) < 2) {
        out << "require " << clause(entry_ints, entry_bools) << "\n";
    }
    for (int i = 0, n = 1 + pick(2); i < n; ++i) {
        out << "ensure " << clause(ints, bools) << "\n";
    }
    int r = pick(20);
    out << "on_revert " << (r < 14 ? "allow" : r < 17 ? "forbid" : "require") << "\n";
    return out.str();
}

}  // namespace fspvm
