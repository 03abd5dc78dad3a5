#pragma once

// Order-maintenance list: a doubly linked list whose items carry integer tags
// increasing along the list, so "is a before b" is one comparison. Handles are
// allocated sequentially from 1 (erased handles are reused first); handle 0 is
// the head sentinel.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace blockrel {

class OrderList {
public:
    using Handle = std::uint32_t;
    static constexpr Handle kHead = 0;

    OrderList() : tag_{0}, next_{kHead}, prev_{kHead}, alive_{1} {}

    /// Insert a new item right after `h` (kHead inserts at the front).
    Handle insert_after(Handle h) {
        check(h);
        Handle x;
        if (!free_.empty()) {
            x = free_.back();
            free_.pop_back();
            alive_[x] = 1;
        } else {
            x = static_cast<Handle>(tag_.size());
            tag_.push_back(0);
            next_.push_back(kHead);
            prev_.push_back(kHead);
            alive_.push_back(1);
        }
        if (gap_after(h) < 2) relabel_around(h);
        const Handle nx = next_[h];
        const std::uint64_t hi = nx == kHead ? kTop : tag_[nx];
        tag_[x] = tag_[h] + (hi - tag_[h]) / 2;
        prev_[x] = h;
        next_[x] = nx;
        next_[h] = x;
        prev_[nx] = x;
        ++size_;
        return x;
    }

    Handle insert_before(Handle h) { return insert_after(prev_[h]); }

    void erase(Handle h) {
        if (h == kHead) throw std::logic_error("cannot erase the head sentinel");
        check(h);
        next_[prev_[h]] = next_[h];
        prev_[next_[h]] = prev_[h];
        alive_[h] = 0;
        free_.push_back(h);
        --size_;
    }

    bool less(Handle a, Handle b) const { return tag_[a] < tag_[b]; }
    bool alive(Handle h) const { return h < alive_.size() && alive_[h]; }
    Handle next(Handle h) const { return next_[h]; }  // kHead past the end
    Handle prev(Handle h) const { return prev_[h]; }  // kHead before the front
    Handle first() const { return next_[kHead]; }
    Handle last() const { return prev_[kHead]; }
    std::size_t size() const { return size_; }
    std::uint64_t tag(Handle h) const { return tag_[h]; }

private:
    static constexpr std::uint64_t kTop = std::numeric_limits<std::uint64_t>::max();
    static constexpr std::uint64_t kMinSpacing = std::uint64_t{1} << 20;

    void check(Handle h) const {
        if (!alive(h)) throw std::logic_error("stale order-list handle");
    }

    std::uint64_t gap_after(Handle h) const {
        const Handle nx = next_[h];
        return (nx == kHead ? kTop : tag_[nx]) - tag_[h];
    }

    // Spread tags evenly over the smallest window around h whose span leaves
    // at least kMinSpacing per item (or over the whole list).
    void relabel_around(Handle h) {
        Handle lo = h == kHead ? next_[kHead] : h;
        if (lo == kHead) return;
        Handle hi = lo;
        std::size_t count = 1;
        for (std::size_t want = 2;; want *= 2) {
            while (count < want && (prev_[lo] != kHead || next_[hi] != kHead)) {
                if (prev_[lo] != kHead) {
                    lo = prev_[lo];
                    ++count;
                }
                if (count < want && next_[hi] != kHead) {
                    hi = next_[hi];
                    ++count;
                }
            }
            const std::uint64_t left = tag_[prev_[lo]];
            const std::uint64_t right = next_[hi] == kHead ? kTop : tag_[next_[hi]];
            const std::uint64_t step = (right - left) / (count + 1);
            const bool whole = prev_[lo] == kHead && next_[hi] == kHead;
            if (step >= kMinSpacing || (whole && step >= 2)) {
                std::uint64_t t = left;
                for (Handle x = lo;; x = next_[x]) {
                    t += step;
                    tag_[x] = t;
                    if (x == hi) break;
                }
                return;
            }
            if (whole) throw std::overflow_error("order list exhausted");
        }
    }

    std::vector<std::uint64_t> tag_;
    std::vector<Handle> next_;
    std::vector<Handle> prev_;
    std::vector<char> alive_;
    std::vector<Handle> free_;
    std::size_t size_ = 0;
};

}  // namespace blockrel
