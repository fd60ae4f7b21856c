#include "fspvm/memory.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

namespace fspvm {

std::string_view visibility_name(Visibility v) {
    switch (v) {
    case Visibility::Public: return "public";
    case Visibility::Private: return "private";
    case Visibility::Internal: return "internal";
    }
    return "?";
}

std::string MemAddress::str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "m_0x%08x", index);
    return buf;
}

bool operator==(const MemBlock& a, const MemBlock& b) {
    return a.decl_type == b.decl_type && a.visibility == b.visibility && a.name == b.name &&
           (a.content == b.content || simplify(a.content) == simplify(b.content));
}

const MemBlock& MemoryState::block(MemAddress a) const {
    if (a.index >= size()) {
        throw MemoryError(MemoryErrorKind::OutOfRange, "address " + a.str() + " outside memory of size " +
                                                           std::to_string(size()));
    }
    return blocks_.get(a.index);
}

MemoryState init_memory(std::size_t size) {
    if (size == 0) {
        throw MemoryError(MemoryErrorKind::InvalidSize, "memory size must be at least 1");
    }
    if (size > 0xffffffffu) {
        throw MemoryError(MemoryErrorKind::InvalidSize, "memory size too large");
    }
    MemoryState m;
    m.blocks_ = PersistentArray<MemBlock>(size, MemBlock{});
    return m;
}

std::pair<MemAddress, MemoryState> allocate(const MemoryState& m, std::string name, LType t,
                                            std::optional<Visibility> vis) {
    if (m.cursor_ >= m.size()) {
        throw MemoryError(MemoryErrorKind::MemoryFull,
                          "no free block for " + name + " (memory size " + std::to_string(m.size()) + ")");
    }
    MemAddress a{m.cursor_};
    MemBlock b = m.blocks_.get(a.index);
    b.name = std::move(name);
    b.decl_type = std::move(t);
    b.visibility = vis;
    MemoryState out = m;
    out.blocks_ = m.blocks_.set(a.index, std::move(b));
    out.cursor_ = m.cursor_ + 1;
    return {a, std::move(out)};
}

MemoryState write(const MemoryState& m, MemAddress a, SymExpr v) {
    MemBlock b = m.block(a);
    if (b.decl_type && !v.is_init_data() && !(v.type() == *b.decl_type)) {
        throw MemoryError(MemoryErrorKind::TypeMismatch, "write to " + a.str() + ": expected " +
                                                             b.decl_type->str() + ", got " + v.type().str());
    }
    b.content = std::move(v);
    MemoryState out = m;
    out.blocks_ = m.blocks_.set(a.index, std::move(b));
    return out;
}

SymExpr read(const MemoryState& m, MemAddress a, const LType& t, const StructTable& structs) {
    const MemBlock& b = m.block(a);
    if (b.content.is_init_data()) {
        if (!b.decl_type) {
            throw MemoryError(MemoryErrorKind::UndeclaredRead, "read of undeclared fresh block " + a.str());
        }
        if (!(*b.decl_type == t)) {
            throw MemoryError(MemoryErrorKind::TypeMismatch, "read of " + a.str() + " at " + t.str() +
                                                                 ", declared " + b.decl_type->str());
        }
        return SymExpr::concrete(default_value(t, structs));
    }
    if (!(b.content.type() == t)) {
        throw MemoryError(MemoryErrorKind::TypeMismatch,
                          "read of " + a.str() + " at " + t.str() + ", holds " + b.content.type().str());
    }
    return b.content;
}

MemoryState release_to(const MemoryState& m, std::uint32_t cursor) {
    if (cursor > m.cursor_) {
        throw MemoryError(MemoryErrorKind::OutOfRange, "release beyond the allocation cursor");
    }
    MemoryState out = m;
    for (std::uint32_t i = cursor; i < m.cursor_; ++i) {
        out.blocks_ = out.blocks_.set(i, MemBlock{});
    }
    out.cursor_ = cursor;
    return out;
}

struct MemoryDiffAccess {
    static const PersistentArray<MemBlock>& blocks(const MemoryState& m) { return m.blocks_; }
};

std::vector<MemDiffEntry> mem_diff(const MemoryState& a, const MemoryState& b) {
    std::vector<MemDiffEntry> out;
    if (a.size() != b.size()) {
        out.push_back(MemDiffEntry{true, {}, {}, {}});
        return out;
    }
    MemoryDiffAccess::blocks(a).diff(MemoryDiffAccess::blocks(b), [&](std::size_t i, const MemBlock& x,
                                                                      const MemBlock& y) {
        if (!(x == y)) {
            out.push_back(MemDiffEntry{false, MemAddress{static_cast<std::uint32_t>(i)}, x, y});
        }
    });
    return out;
}

bool mem_equal(const MemoryState& a, const MemoryState& b) {
    if (a.size() != b.size()) {
        return false;
    }
    bool equal = true;
    MemoryDiffAccess::blocks(a).diff(MemoryDiffAccess::blocks(b),
                                     [&](std::size_t, const MemBlock& x, const MemBlock& y) {
                                         equal = equal && x == y;
                                     });
    return equal;
}

std::string render_block(MemAddress a, const MemBlock& b) {
    std::string line = a.str();
    if (b.name || b.decl_type) {
        line += " [" + b.name.value_or("_") + " : " + (b.decl_type ? b.decl_type->str() : "?");
        if (b.visibility) {
            line += ", " + std::string(visibility_name(*b.visibility));
        }
        line += "]";
    }
    return line + " := " + b.content.render() + ";";
}

std::string dump_memory(const MemoryState& m, bool include_fresh) {
    std::string out;
    MemoryDiffAccess::blocks(m).for_each([&](std::size_t i, const MemBlock& b) {
        if (include_fresh || !b.is_fresh()) {
            out += render_block(MemAddress{static_cast<std::uint32_t>(i)}, b);
            out += '\n';
        }
    });
    return out;
}

nlohmann::json memory_to_json(const MemoryState& m, bool include_fresh) {
    nlohmann::json blocks = nlohmann::json::array();
    MemoryDiffAccess::blocks(m).for_each([&](std::size_t i, const MemBlock& b) {
        if (!include_fresh && b.is_fresh()) {
            return;
        }
        nlohmann::json j;
        j["address"] = MemAddress{static_cast<std::uint32_t>(i)}.str();
        j["name"] = b.name ? nlohmann::json(*b.name) : nlohmann::json(nullptr);
        j["type"] = b.decl_type ? nlohmann::json(b.decl_type->str()) : nlohmann::json(nullptr);
        j["visibility"] = b.visibility ? nlohmann::json(std::string(visibility_name(*b.visibility))) : nlohmann::json(nullptr);
        j["content"] = b.content.render();
        blocks.push_back(std::move(j));
    });
    return {{"size", m.size()}, {"alloc_cursor", m.alloc_cursor()}, {"blocks", std::move(blocks)}};
}

}  // namespace fspvm
