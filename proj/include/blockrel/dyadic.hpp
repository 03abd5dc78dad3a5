#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace blockrel {

/// Exact dyadic rational num / 2^exp, kept normalized (num odd, or num == 0 with exp == 0).
class Dyadic {
public:
    static constexpr int kMaxExp = 62;

    constexpr Dyadic() = default;
    Dyadic(std::int64_t num, int exp);

    static Dyadic integer(std::int64_t v) { return Dyadic(v, 0); }

    std::int64_t num() const { return num_; }
    int exp() const { return exp_; }

    /// Midpoint of two dyadics; throws std::overflow_error past kMaxExp.
    static Dyadic midpoint(const Dyadic& a, const Dyadic& b);
    /// Affine map lo + x * 2^-shift, used to nest a unit interval inside a subinterval.
    Dyadic scaled_into(const Dyadic& lo, int shift) const;

    friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);
    friend bool operator==(const Dyadic& a, const Dyadic& b) = default;

    double to_double() const;
    std::string str() const;

private:
    std::int64_t num_ = 0;
    int exp_ = 0;
};

}  // namespace blockrel
