#include "fspvm/domain.hpp"

#include <sstream>

namespace fspvm {

struct LType::Rep {
    TypeKind kind = TypeKind::Unit;
    int width = 0;
    Signedness sign = Signedness::Unsigned;
    int bytes = 0;
    std::string name;
    std::vector<LType> children;  // mapping: key, value
    std::vector<LType> params;
    std::vector<LType> rets;
};

namespace {

std::shared_ptr<const LType::Rep> make_rep(LType::Rep r) { return std::make_shared<const LType::Rep>(std::move(r)); }

const std::shared_ptr<const LType::Rep>& unit_rep() {
    static const auto rep = [] {
        LType::Rep r;
        r.kind = TypeKind::Unit;
        return std::make_shared<const LType::Rep>(std::move(r));
    }();
    return rep;
}

}  // namespace

bool is_valid_int_width(int width) {
    switch (width) {
    case 8:
    case 16:
    case 32:
    case 64:
    case 128:
    case 256: return true;
    default: return false;
    }
}

LType::LType() : rep_(unit_rep()) {}
LType::LType(std::shared_ptr<const Rep> rep) : rep_(std::move(rep)) {}

LType LType::integer(int width, Signedness signedness) {
    if (!is_valid_int_width(width)) {
        throw DomainError(DomainErrorKind::IllTyped, "invalid integer width " + std::to_string(width));
    }
    // Interned: integer types are created constantly by the interpreter.
    static const auto table = [] {
        std::map<std::pair<int, int>, std::shared_ptr<const Rep>> t;
        for (int w : {8, 16, 32, 64, 128, 256}) {
            for (auto s : {Signedness::Signed, Signedness::Unsigned}) {
                Rep r;
                r.kind = TypeKind::Int;
                r.width = w;
                r.sign = s;
                t[{w, static_cast<int>(s)}] = make_rep(std::move(r));
            }
        }
        return t;
    }();
    return LType(table.at({width, static_cast<int>(signedness)}));
}

LType LType::boolean() {
    static const auto rep = [] {
        Rep r;
        r.kind = TypeKind::Bool;
        return make_rep(std::move(r));
    }();
    return LType(rep);
}

LType LType::address() {
    static const auto rep = [] {
        Rep r;
        r.kind = TypeKind::Address;
        return make_rep(std::move(r));
    }();
    return LType(rep);
}

LType LType::string() {
    static const auto rep = [] {
        Rep r;
        r.kind = TypeKind::String;
        return make_rep(std::move(r));
    }();
    return LType(rep);
}

LType LType::bytes(int n) {
    if (n < 1 || n > 32) {
        throw DomainError(DomainErrorKind::IllTyped, "invalid bytes length " + std::to_string(n));
    }
    Rep r;
    r.kind = TypeKind::Bytes;
    r.bytes = n;
    return LType(make_rep(std::move(r)));
}

LType LType::mapping(LType key, LType value) {
    switch (key.kind()) {
    case TypeKind::Int:
    case TypeKind::Address:
    case TypeKind::Bool:
    case TypeKind::String: break;
    default: throw DomainError(DomainErrorKind::IllTyped, "mapping key must be a hashable scalar, got " + key.str());
    }
    Rep r;
    r.kind = TypeKind::Mapping;
    r.children = {std::move(key), std::move(value)};
    return LType(make_rep(std::move(r)));
}

LType LType::structure(std::string name) {
    Rep r;
    r.kind = TypeKind::Struct;
    r.name = std::move(name);
    return LType(make_rep(std::move(r)));
}

LType LType::function(std::vector<LType> params, std::vector<LType> rets) {
    Rep r;
    r.kind = TypeKind::Fun;
    r.params = std::move(params);
    r.rets = std::move(rets);
    return LType(make_rep(std::move(r)));
}

LType LType::unit() { return LType(); }

TypeKind LType::kind() const { return rep_->kind; }

bool LType::is_scalar() const {
    switch (kind()) {
    case TypeKind::Int:
    case TypeKind::Bool:
    case TypeKind::Address:
    case TypeKind::String:
    case TypeKind::Bytes: return true;
    default: return false;
    }
}

int LType::width() const { return rep_->width; }
Signedness LType::signedness() const { return rep_->sign; }
int LType::bytes_len() const { return rep_->bytes; }
const LType& LType::key() const { return rep_->children.at(0); }
const LType& LType::value() const { return rep_->children.at(1); }
const std::string& LType::struct_name() const { return rep_->name; }
const std::vector<LType>& LType::params() const { return rep_->params; }
const std::vector<LType>& LType::rets() const { return rep_->rets; }

std::string LType::str() const {
    switch (kind()) {
    case TypeKind::Int: return (signedness() == Signedness::Signed ? "int" : "uint") + std::to_string(width());
    case TypeKind::Bool: return "bool";
    case TypeKind::Address: return "address";
    case TypeKind::String: return "string";
    case TypeKind::Bytes: return "bytes" + std::to_string(bytes_len());
    case TypeKind::Mapping: return "mapping(" + key().str() + " => " + value().str() + ")";
    case TypeKind::Struct: return struct_name();
    case TypeKind::Fun: {
        std::ostringstream os;
        os << "function(";
        for (std::size_t i = 0; i < params().size(); ++i) {
            os << (i ? ", " : "") << params()[i].str();
        }
        os << ")";
        if (!rets().empty()) {
            os << " returns (";
            for (std::size_t i = 0; i < rets().size(); ++i) {
                os << (i ? ", " : "") << rets()[i].str();
            }
            os << ")";
        }
        return os.str();
    }
    case TypeKind::Unit: return "unit";
    }
    return "?";
}

namespace {

std::strong_ordering compare_lists(const std::vector<LType>& a, const std::vector<LType>& b) {
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        if (auto c = a[i] <=> b[i]; c != 0) {
            return c;
        }
    }
    return a.size() <=> b.size();
}

}  // namespace

std::strong_ordering operator<=>(const LType& a, const LType& b) {
    if (a.rep_ == b.rep_) {
        return std::strong_ordering::equal;
    }
    const auto& x = *a.rep_;
    const auto& y = *b.rep_;
    if (auto c = static_cast<int>(x.kind) <=> static_cast<int>(y.kind); c != 0) {
        return c;
    }
    switch (x.kind) {
    case TypeKind::Int:
        if (auto c = x.width <=> y.width; c != 0) {
            return c;
        }
        return static_cast<int>(x.sign) <=> static_cast<int>(y.sign);
    case TypeKind::Bytes: return x.bytes <=> y.bytes;
    case TypeKind::Struct: return x.name <=> y.name;
    case TypeKind::Mapping: return compare_lists(x.children, y.children);
    case TypeKind::Fun:
        if (auto c = compare_lists(x.params, y.params); c != 0) {
            return c;
        }
        return compare_lists(x.rets, y.rets);
    default: return std::strong_ordering::equal;
    }
}

bool operator==(const LType& a, const LType& b) { return (a <=> b) == 0; }

}  // namespace fspvm
