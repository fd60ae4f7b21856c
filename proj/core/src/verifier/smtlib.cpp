#include <set>
#include <sstream>

#include "fspvm/solver.hpp"

namespace fspvm {

namespace {

class SmtWriter {
public:
    std::string sort(const LType& t) {
        switch (t.kind()) {
        case TypeKind::Int: return "(_ BitVec " + std::to_string(t.width()) + ")";
        case TypeKind::Bool: return "Bool";
        case TypeKind::Address: return "(_ BitVec 160)";
        case TypeKind::Bytes: return "(_ BitVec " + std::to_string(8 * t.bytes_len()) + ")";
        case TypeKind::String: uses_strings_ = true; return "Str";
        case TypeKind::Mapping: return "(Array " + sort(t.key()) + " " + sort(t.value()) + ")";
        default: throw UnsupportedSort("no SMT-LIB sort for " + t.str());
        }
    }

    std::string value(const Value& v) {
        switch (v.kind()) {
        case ValueKind::Int: return "(_ bv" + v.int_bits().str() + " " + std::to_string(v.int_width()) + ")";
        case ValueKind::Bool: return v.as_bool() ? "true" : "false";
        case ValueKind::Address: return "(_ bv" + v.address_bits().str() + " 160)";
        case ValueKind::Bytes: {
            if (v.as_bytes().empty()) {
                throw UnsupportedSort("zero-length bytes");
            }
            std::string out = "#x";
            static const char* digits = "0123456789abcdef";
            for (auto b : v.as_bytes()) {
                out += digits[b >> 4];
                out += digits[b & 15];
            }
            return out;
        }
        case ValueKind::String: {
            auto [it, fresh] = strings_.emplace(v.as_string(), "|str" + std::to_string(strings_.size()) + "|");
            return it->second;
        }
        case ValueKind::Map: {
            const MapData& m = v.as_map();
            std::string out = "((as const " + sort(v.type()) + ") " + value(*m.fallback) + ")";
            for (const auto& [k, x] : m.entries) {
                out = "(store " + out + " " + value(k) + " " + value(x) + ")";
            }
            return out;
        }
        default: throw UnsupportedSort("no SMT-LIB term for value " + v.render());
        }
    }

    std::string term(const SymExpr& e) {
        switch (e.kind()) {
        case SymKind::Concrete: return value(e.value());
        case SymKind::Var: {
            std::string s = sort(e.type());
            vars_.emplace(e.name(), s);
            return "|" + e.name() + "|";
        }
        case SymKind::App: {
            if (e.is_unary()) {
                return std::string(e.unop() == UnOp::Not ? "(not " : "(bvneg ") + term(e.arg(0)) + ")";
            }
            const LType& t = e.arg(0).type();
            if (t.kind() == TypeKind::String && e.binop() != BinOp::Eq && e.binop() != BinOp::Ne) {
                throw UnsupportedSort("string operation beyond equality");
            }
            std::string a = term(e.arg(0));
            std::string b = term(e.arg(1));
            if (e.binop() == BinOp::Ne) {
                return "(not (= " + a + " " + b + "))";
            }
            return "(" + op(e.binop(), t.is_signed()) + " " + a + " " + b + ")";
        }
        case SymKind::MapSelect: return "(select " + term(e.arg(0)) + " " + term(e.arg(1)) + ")";
        case SymKind::MapStore:
            return "(store " + term(e.arg(0)) + " " + term(e.arg(1)) + " " + term(e.arg(2)) + ")";
        case SymKind::Ite: return "(ite " + term(e.arg(0)) + " " + term(e.arg(1)) + " " + term(e.arg(2)) + ")";
        case SymKind::FieldSel:
        case SymKind::FieldStore: throw UnsupportedSort("struct values have no SMT-LIB sort here");
        }
        throw UnsupportedSort("unknown term");
    }

    static std::string op(BinOp o, bool s) {
        switch (o) {
        case BinOp::Add: return "bvadd";
        case BinOp::Sub: return "bvsub";
        case BinOp::Mul: return "bvmul";
        case BinOp::Div: return s ? "bvsdiv" : "bvudiv";
        case BinOp::Mod: return s ? "bvsrem" : "bvurem";
        case BinOp::Lt: return s ? "bvslt" : "bvult";
        case BinOp::Le: return s ? "bvsle" : "bvule";
        case BinOp::Gt: return s ? "bvsgt" : "bvugt";
        case BinOp::Ge: return s ? "bvsge" : "bvuge";
        case BinOp::Eq: return "=";
        case BinOp::Ne: return "distinct";
        case BinOp::And: return "and";
        case BinOp::Or: return "or";
        }
        return "?";
    }

    std::string script(const std::vector<Constraint>& pc) {
        std::vector<std::string> asserts;
        for (const auto& c : pc) {
            std::string t = term(c.expr);
            asserts.push_back((c.origin.empty() ? "" : "; " + c.origin + "\n") + "(assert " + t + ")");
        }
        if (asserts.empty()) {
            asserts.push_back("(assert true)");
        }
        std::string out = "(set-logic QF_AUFBV)\n";
        if (uses_strings_ || !strings_.empty()) {
            out += "(declare-sort Str 0)\n";
            for (const auto& [text, name] : strings_) {
                out += "(declare-const " + name + " Str) ; \"" + text + "\"\n";
            }
            if (strings_.size() > 1) {
                out += "(assert (distinct";
                for (const auto& [text, name] : strings_) {
                    out += " " + name;
                }
                out += "))\n";
            }
        }
        for (const auto& [name, s] : vars_) {
            out += "(declare-const |" + name + "| " + s + ")\n";
        }
        for (const auto& a : asserts) {
            out += a + "\n";
        }
        out += "(check-sat)\n(get-model)\n";
        return out;
    }

private:
    std::map<std::string, std::string> vars_;
    std::map<std::string, std::string> strings_;
    bool uses_strings_ = false;
};

}  // namespace

std::string export_smtlib(const std::vector<Constraint>& pc) { return SmtWriter().script(pc); }

}  // namespace fspvm
