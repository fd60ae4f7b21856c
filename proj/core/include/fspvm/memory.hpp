#pragma once

// GERM: a fixed number of typed memory blocks, updated persistently.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fspvm/domain.hpp"
#include "fspvm/persistent_array.hpp"

namespace fspvm {

enum class Visibility { Public, Private, Internal };

std::string_view visibility_name(Visibility v);

struct MemAddress {
    std::uint32_t index = 0;

    /// `m_0x0000005f`
    std::string str() const;
    friend auto operator<=>(const MemAddress&, const MemAddress&) = default;
};

struct MemBlock {
    SymExpr content;  // initData when fresh
    std::optional<LType> decl_type;
    std::optional<Visibility> visibility;
    std::optional<std::string> name;

    bool is_fresh() const { return content.is_init_data() && !decl_type && !name; }
    friend bool operator==(const MemBlock& a, const MemBlock& b);
};

enum class MemoryErrorKind { InvalidSize, MemoryFull, OutOfRange, TypeMismatch, UndeclaredRead };

class MemoryError : public std::runtime_error {
public:
    MemoryError(MemoryErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    MemoryErrorKind kind() const { return kind_; }

private:
    MemoryErrorKind kind_;
};

class MemoryState {
public:
    std::size_t size() const { return blocks_.size(); }
    std::uint32_t alloc_cursor() const { return cursor_; }
    const MemBlock& block(MemAddress a) const;

    friend MemoryState init_memory(std::size_t size);
    friend std::pair<MemAddress, MemoryState> allocate(const MemoryState& m, std::string name, LType t,
                                                       std::optional<Visibility> vis);
    friend MemoryState write(const MemoryState& m, MemAddress a, SymExpr v);
    friend MemoryState release_to(const MemoryState& m, std::uint32_t cursor);
    friend struct MemoryDiffAccess;

private:
    PersistentArray<MemBlock> blocks_;
    std::uint32_t cursor_ = 0;
};

MemoryState init_memory(std::size_t size);

/// Binds the block at the allocation cursor to a declaration and advances the cursor.
std::pair<MemAddress, MemoryState> allocate(const MemoryState& m, std::string name, LType t,
                                            std::optional<Visibility> vis = std::nullopt);

/// Type-guarded update of one block's content.
MemoryState write(const MemoryState& m, MemAddress a, SymExpr v);

/// Contents of a block at type t; a fresh declared block reads as default_value(t).
SymExpr read(const MemoryState& m, MemAddress a, const LType& t, const StructTable& structs = {});

/// Frees every block at index >= cursor (restoring them to fresh) and moves the cursor back.
MemoryState release_to(const MemoryState& m, std::uint32_t cursor);

/// Same size and equal blocks, with contents compared after simplify.
bool mem_equal(const MemoryState& a, const MemoryState& b);

struct MemDiffEntry {
    bool size_mismatch = false;
    MemAddress address;
    MemBlock left;
    MemBlock right;
};

/// Addresses whose blocks differ, ascending; a single size_mismatch entry for incomparable states.
std::vector<MemDiffEntry> mem_diff(const MemoryState& a, const MemoryState& b);

/// One line per block: `m_0x00000000 [close : uint64, public] := uint64(0);`
/// or `m_0x0000005f := initData;` for fresh blocks.
std::string render_block(MemAddress a, const MemBlock& b);
std::string dump_memory(const MemoryState& m, bool include_fresh = true);
nlohmann::json memory_to_json(const MemoryState& m, bool include_fresh = false);

}  // namespace fspvm
