#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <variant>

namespace fspvm {

/// Fixed-length array with O(log16 n) persistent updates. Untouched
/// subtrees are shared between versions, which also lets diff() skip
/// them by pointer comparison.
template <class T>
class PersistentArray {
    static constexpr std::size_t kBits = 4;
    static constexpr std::size_t kFan = std::size_t{1} << kBits;
    static constexpr std::size_t kMask = kFan - 1;
    static constexpr std::size_t kLeafBits = 2;
    static constexpr std::size_t kLeaf = std::size_t{1} << kLeafBits;
    static constexpr std::size_t kLeafMask = kLeaf - 1;

    struct Node;
    using NodePtr = std::shared_ptr<const Node>;
    struct Node {
        std::variant<std::array<NodePtr, kFan>, std::array<T, kLeaf>> slots;
    };

public:
    PersistentArray() = default;

    PersistentArray(std::size_t n, const T& fill) : size_(n) {
        while ((kLeaf << shift_) < n) {
            shift_ += kBits;
        }
        auto leaf = std::make_shared<Node>();
        std::array<T, kLeaf> vals;
        vals.fill(fill);
        leaf->slots = vals;
        NodePtr level = leaf;
        // Every fresh subtree is the same value, so one node per level suffices.
        for (std::size_t s = kBits; s <= shift_; s += kBits) {
            auto inner = std::make_shared<Node>();
            std::array<NodePtr, kFan> kids;
            kids.fill(level);
            inner->slots = kids;
            level = inner;
        }
        root_ = level;
    }

    std::size_t size() const { return size_; }

    const T& get(std::size_t i) const {
        check(i);
        const Node* n = root_.get();
        for (std::size_t s = shift_; s > 0; s -= kBits) {
            n = std::get<0>(n->slots)[(i >> (s - kBits + kLeafBits)) & kMask].get();
        }
        return std::get<1>(n->slots)[i & kLeafMask];
    }

    PersistentArray set(std::size_t i, T value) const {
        check(i);
        PersistentArray out = *this;
        out.root_ = set_rec(root_, shift_, i, std::move(value));
        return out;
    }

    /// Calls f(index, a, b) for every index where the two arrays' slots are
    /// not shared; f decides whether the values really differ. Sizes must match.
    template <class F>
    void diff(const PersistentArray& other, F&& f) const {
        if (other.size_ != size_) {
            throw std::invalid_argument("PersistentArray::diff on arrays of different size");
        }
        diff_rec(root_, other.root_, shift_, 0, f);
    }

    template <class F>
    void for_each(F&& f) const {
        for (std::size_t i = 0; i < size_; ++i) {
            f(i, get(i));
        }
    }

private:
    void check(std::size_t i) const {
        if (i >= size_) {
            throw std::out_of_range("PersistentArray index");
        }
    }

    static NodePtr set_rec(const NodePtr& n, std::size_t shift, std::size_t i, T value) {
        auto copy = std::make_shared<Node>(*n);
        if (shift == 0) {
            std::get<1>(copy->slots)[i & kLeafMask] = std::move(value);
        } else {
            auto& kids = std::get<0>(copy->slots);
            auto& kid = kids[(i >> (shift - kBits + kLeafBits)) & kMask];
            kid = set_rec(kid, shift - kBits, i, std::move(value));
        }
        return copy;
    }

    template <class F>
    void diff_rec(const NodePtr& a, const NodePtr& b, std::size_t shift, std::size_t base, F& f) const {
        if (a == b || base >= size_) {
            return;
        }
        if (shift == 0) {
            const auto& x = std::get<1>(a->slots);
            const auto& y = std::get<1>(b->slots);
            for (std::size_t k = 0; k < kLeaf && base + k < size_; ++k) {
                f(base + k, x[k], y[k]);
            }
            return;
        }
        const auto& x = std::get<0>(a->slots);
        const auto& y = std::get<0>(b->slots);
        for (std::size_t k = 0; k < kFan; ++k) {
            diff_rec(x[k], y[k], shift - kBits, base + (k << (shift - kBits + kLeafBits)), f);
        }
    }

    std::size_t size_ = 0;
    std::size_t shift_ = 0;
    NodePtr root_;
};

}  // namespace fspvm
