#ifndef QAGG_NODE_SET_HPP
#define QAGG_NODE_SET_HPP

#include <bit>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace qagg {

using NodeId = std::uint32_t;

inline constexpr NodeId kSink = 0;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// Fixed-universe bitset over node ids [0, universe).
///
/// Iteration with for_each() visits members in ascending id order, which the
/// schedulers rely on for deterministic tie-breaking.
class NodeSet {
public:
    NodeSet() = default;
    explicit NodeSet(std::size_t universe)
        : universe_(universe), words_((universe + 63) / 64, 0) {}

    std::size_t universe() const { return universe_; }

    bool contains(NodeId v) const {
        return v < universe_ && ((words_[v >> 6] >> (v & 63)) & 1u);
    }
    void insert(NodeId v) { words_[v >> 6] |= std::uint64_t{1} << (v & 63); }
    void erase(NodeId v) { words_[v >> 6] &= ~(std::uint64_t{1} << (v & 63)); }

    std::size_t size() const {
        std::size_t n = 0;
        for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }
    bool empty() const {
        for (auto w : words_)
            if (w) return false;
        return true;
    }

    /// Set complement within the universe.
    NodeSet complement() const {
        NodeSet out(universe_);
        for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] = ~words_[i];
        out.trim();
        return out;
    }

    bool intersects(const NodeSet& other) const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & other.words_[i]) return true;
        return false;
    }
    std::size_t intersection_size(const NodeSet& other) const {
        std::size_t n = 0;
        for (std::size_t i = 0; i < words_.size(); ++i)
            n += static_cast<std::size_t>(std::popcount(words_[i] & other.words_[i]));
        return n;
    }

    NodeSet& operator&=(const NodeSet& other) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
        return *this;
    }
    NodeSet& operator|=(const NodeSet& other) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
        return *this;
    }
    /// Removes every member of `other`.
    NodeSet& subtract(const NodeSet& other) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
        return *this;
    }

    friend NodeSet operator&(NodeSet a, const NodeSet& b) { return a &= b; }
    friend NodeSet operator|(NodeSet a, const NodeSet& b) { return a |= b; }

    template <class F>
    void for_each(F&& f) const {
        for (std::size_t i = 0; i < words_.size(); ++i) {
            std::uint64_t w = words_[i];
            while (w) {
                const auto bit = static_cast<std::size_t>(std::countr_zero(w));
                f(static_cast<NodeId>(i * 64 + bit));
                w &= w - 1;
            }
        }
    }

    std::vector<NodeId> to_vector() const {
        std::vector<NodeId> out;
        out.reserve(size());
        for_each([&](NodeId v) { out.push_back(v); });
        return out;
    }

    const std::vector<std::uint64_t>& words() const { return words_; }

    friend bool operator==(const NodeSet&, const NodeSet&) = default;

private:
    void trim() {
        if (universe_ % 64 != 0 && !words_.empty())
            words_.back() &= (std::uint64_t{1} << (universe_ % 64)) - 1;
    }

    std::size_t universe_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace qagg

#endif  // QAGG_NODE_SET_HPP
