#include <sstream>

#include "fspvm/domain.hpp"

namespace fspvm {

namespace {

const BigInt& pow2(int width) {
    static const auto table = [] {
        std::map<int, BigInt> t;
        for (int w : {8, 16, 32, 64, 128, 160, 256}) {
            t[w] = BigInt(1) << w;
        }
        return t;
    }();
    return table.at(width);
}

std::string hex_digits(const Bits256& bits, int digits) {
    static const char* hex = "0123456789abcdef";
    std::string out(static_cast<std::size_t>(digits), '0');
    Bits256 v = bits;
    for (int i = digits - 1; i >= 0 && v != 0; --i) {
        out[static_cast<std::size_t>(i)] = hex[static_cast<unsigned>(v & 0xf)];
        v >>= 4;
    }
    return out;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

[[noreturn]] void ill_typed(const std::string& what) { throw DomainError(DomainErrorKind::IllTyped, what); }

}  // namespace

Bits256 width_mask(int width) {
    if (width >= 256) {
        return ~Bits256(0);
    }
    return (Bits256(1) << width) - 1;
}

Value int_wrap(int width, Signedness s, const BigInt& n) {
    if (!is_valid_int_width(width)) {
        ill_typed("invalid integer width " + std::to_string(width));
    }
    const BigInt& modulus = pow2(width);
    BigInt r = n % modulus;
    if (r < 0) {
        r += modulus;
    }
    return Value::from_bits(width, s, static_cast<Bits256>(r));
}

Value::Value() : rep_(InitV{}) {}

Value Value::integer(int width, Signedness s, const BigInt& n) { return int_wrap(width, s, n); }

Value Value::from_bits(int width, Signedness s, const Bits256& bits) {
    if (!is_valid_int_width(width)) {
        ill_typed("invalid integer width " + std::to_string(width));
    }
    return Value(IntV{static_cast<std::uint16_t>(width), s, bits & width_mask(width)});
}

Value Value::boolean(bool b) { return Value(b); }

Value Value::address(const Bits256& bits) { return Value(AddrV{bits & width_mask(160)}); }

Value Value::string(std::string text) { return Value(StrV{std::move(text)}); }

Value Value::bytes(std::vector<std::uint8_t> octets) {
    if (octets.empty() || octets.size() > 32) {
        ill_typed("bytes value must have 1..32 octets");
    }
    return Value(BytesV{std::move(octets)});
}

Value Value::map(LType key_type, LType value_type, Value fallback, std::map<Value, Value> entries) {
    auto data = std::make_shared<MapData>();
    data->key_type = std::move(key_type);
    data->value_type = std::move(value_type);
    for (auto it = entries.begin(); it != entries.end();) {
        if (it->second == fallback) {
            it = entries.erase(it);
        } else {
            ++it;
        }
    }
    data->fallback = std::make_shared<const Value>(std::move(fallback));
    data->entries = std::move(entries);
    return Value(std::shared_ptr<const MapData>(std::move(data)));
}

Value Value::structure(std::string name, std::vector<std::pair<std::string, Value>> fields) {
    auto data = std::make_shared<StructData>();
    data->name = std::move(name);
    data->fields = std::move(fields);
    return Value(std::shared_ptr<const StructData>(std::move(data)));
}

Value Value::funptr(std::string name, LType fun_type) {
    if (!fun_type.is_fun()) {
        ill_typed("function pointer needs a function type");
    }
    return Value(FunV{std::move(name), std::move(fun_type)});
}

Value Value::unit() { return Value(UnitV{}); }
Value Value::init_data() { return Value(InitV{}); }

ValueKind Value::kind() const { return static_cast<ValueKind>(rep_.index()); }

int Value::int_width() const { return std::get<IntV>(rep_).width; }
Signedness Value::int_signedness() const { return std::get<IntV>(rep_).sign; }
const Bits256& Value::int_bits() const { return std::get<IntV>(rep_).bits; }

BigInt Value::int_value() const {
    const auto& v = std::get<IntV>(rep_);
    BigInt n = static_cast<BigInt>(v.bits);
    if (v.sign == Signedness::Signed && bit_test(v.bits, v.width - 1)) {
        n -= pow2(v.width);
    }
    return n;
}

bool Value::as_bool() const { return std::get<bool>(rep_); }
const Bits256& Value::address_bits() const { return std::get<AddrV>(rep_).bits; }
const std::string& Value::as_string() const { return std::get<StrV>(rep_).text; }
const std::vector<std::uint8_t>& Value::as_bytes() const { return std::get<BytesV>(rep_).octets; }
const MapData& Value::as_map() const { return *std::get<std::shared_ptr<const MapData>>(rep_); }
const StructData& Value::as_struct() const { return *std::get<std::shared_ptr<const StructData>>(rep_); }
const std::string& Value::funptr_name() const { return std::get<FunV>(rep_).name; }

LType Value::type() const {
    switch (kind()) {
    case ValueKind::Int: return LType::integer(int_width(), int_signedness());
    case ValueKind::Bool: return LType::boolean();
    case ValueKind::Address: return LType::address();
    case ValueKind::String: return LType::string();
    case ValueKind::Bytes: return LType::bytes(static_cast<int>(as_bytes().size()));
    case ValueKind::Map: return LType::mapping(as_map().key_type, as_map().value_type);
    case ValueKind::Struct: return LType::structure(as_struct().name);
    case ValueKind::FunPtr: return std::get<FunV>(rep_).type;
    case ValueKind::Unit: return LType::unit();
    case ValueKind::InitData: break;
    }
    ill_typed("initData has no type");
}

Value Value::map_get(const Value& key) const {
    const auto& m = as_map();
    if (auto it = m.entries.find(key); it != m.entries.end()) {
        return it->second;
    }
    return *m.fallback;
}

Value Value::map_set(const Value& key, const Value& v) const {
    const auto& m = as_map();
    auto entries = m.entries;
    if (v == *m.fallback) {
        entries.erase(key);
    } else {
        entries.insert_or_assign(key, v);
    }
    auto data = std::make_shared<MapData>();
    data->key_type = m.key_type;
    data->value_type = m.value_type;
    data->fallback = m.fallback;
    data->entries = std::move(entries);
    return Value(std::shared_ptr<const MapData>(std::move(data)));
}

Value Value::field(const std::string& name) const {
    for (const auto& [n, v] : as_struct().fields) {
        if (n == name) {
            return v;
        }
    }
    ill_typed("struct " + as_struct().name + " has no field " + name);
}

Value Value::with_field(const std::string& name, const Value& v) const {
    auto fields = as_struct().fields;
    for (auto& [n, old] : fields) {
        if (n == name) {
            old = v;
            return structure(as_struct().name, std::move(fields));
        }
    }
    ill_typed("struct " + as_struct().name + " has no field " + name);
}

std::string Value::render() const {
    switch (kind()) {
    case ValueKind::Int: {
        std::ostringstream os;
        os << (int_signedness() == Signedness::Signed ? "int" : "uint") << int_width() << "(" << int_value() << ")";
        return os.str();
    }
    case ValueKind::Bool: return as_bool() ? "true" : "false";
    case ValueKind::Address: return "addr(0x" + hex_digits(address_bits(), 40) + ")";
    case ValueKind::String: return quote(as_string());
    case ValueKind::Bytes: {
        std::string out = "bytes" + std::to_string(as_bytes().size()) + "(0x";
        for (auto b : as_bytes()) {
            out += hex_digits(Bits256(b), 2);
        }
        return out + ")";
    }
    case ValueKind::Map: {
        std::string out = "map{default=" + as_map().fallback->render();
        for (const auto& [k, v] : as_map().entries) {
            out += ", [" + k.render() + "]=" + v.render();
        }
        return out + "}";
    }
    case ValueKind::Struct: {
        std::string out = as_struct().name + "{";
        bool first = true;
        for (const auto& [n, v] : as_struct().fields) {
            out += (first ? "" : ", ") + n + "=" + v.render();
            first = false;
        }
        return out + "}";
    }
    case ValueKind::FunPtr: return "fun(" + funptr_name() + ")";
    case ValueKind::Unit: return "unit";
    case ValueKind::InitData: return "initData";
    }
    return "?";
}

int Value::compare(const Value& a, const Value& b) {
    if (a.rep_.index() != b.rep_.index()) {
        return a.rep_.index() < b.rep_.index() ? -1 : 1;
    }
    auto cmp = [](const auto& x, const auto& y) { return x < y ? -1 : (y < x ? 1 : 0); };
    switch (a.kind()) {
    case ValueKind::Int: {
        const auto& x = std::get<IntV>(a.rep_);
        const auto& y = std::get<IntV>(b.rep_);
        if (int c = cmp(x.width, y.width)) {
            return c;
        }
        if (int c = cmp(static_cast<int>(x.sign), static_cast<int>(y.sign))) {
            return c;
        }
        return cmp(x.bits, y.bits);
    }
    case ValueKind::Bool: return cmp(a.as_bool(), b.as_bool());
    case ValueKind::Address: return cmp(a.address_bits(), b.address_bits());
    case ValueKind::String: return cmp(a.as_string(), b.as_string());
    case ValueKind::Bytes: return cmp(a.as_bytes(), b.as_bytes());
    case ValueKind::Map: {
        const auto& x = a.as_map();
        const auto& y = b.as_map();
        if (&x == &y) {
            return 0;
        }
        if (auto c = x.key_type <=> y.key_type; c != 0) {
            return c < 0 ? -1 : 1;
        }
        if (auto c = x.value_type <=> y.value_type; c != 0) {
            return c < 0 ? -1 : 1;
        }
        if (int c = compare(*x.fallback, *y.fallback)) {
            return c;
        }
        auto i = x.entries.begin();
        auto j = y.entries.begin();
        for (; i != x.entries.end() && j != y.entries.end(); ++i, ++j) {
            if (int c = compare(i->first, j->first)) {
                return c;
            }
            if (int c = compare(i->second, j->second)) {
                return c;
            }
        }
        return cmp(x.entries.size(), y.entries.size());
    }
    case ValueKind::Struct: {
        const auto& x = a.as_struct();
        const auto& y = b.as_struct();
        if (int c = cmp(x.name, y.name)) {
            return c;
        }
        for (std::size_t i = 0; i < x.fields.size() && i < y.fields.size(); ++i) {
            if (int c = cmp(x.fields[i].first, y.fields[i].first)) {
                return c;
            }
            if (int c = compare(x.fields[i].second, y.fields[i].second)) {
                return c;
            }
        }
        return cmp(x.fields.size(), y.fields.size());
    }
    case ValueKind::FunPtr: return cmp(a.funptr_name(), b.funptr_name());
    case ValueKind::Unit:
    case ValueKind::InitData: return 0;
    }
    return 0;
}

Value default_value(const LType& t, const StructTable& structs) {
    switch (t.kind()) {
    case TypeKind::Int: return Value::from_bits(t.width(), t.signedness(), 0);
    case TypeKind::Bool: return Value::boolean(false);
    case TypeKind::Address: return Value::address(0);
    case TypeKind::String: return Value::string("");
    case TypeKind::Bytes: return Value::bytes(std::vector<std::uint8_t>(static_cast<std::size_t>(t.bytes_len()), 0));
    case TypeKind::Mapping: return Value::map(t.key(), t.value(), default_value(t.value(), structs));
    case TypeKind::Struct: {
        auto it = structs.find(t.struct_name());
        if (it == structs.end()) {
            throw DomainError(DomainErrorKind::UnknownStruct, "unknown struct " + t.struct_name());
        }
        std::vector<std::pair<std::string, Value>> fields;
        for (const auto& [name, ft] : it->second) {
            fields.emplace_back(name, default_value(ft, structs));
        }
        return Value::structure(t.struct_name(), std::move(fields));
    }
    case TypeKind::Fun: throw DomainError(DomainErrorKind::NoDefault, "no default value for " + t.str());
    case TypeKind::Unit: return Value::unit();
    }
    throw DomainError(DomainErrorKind::NoDefault, "no default value");
}

}  // namespace fspvm
