#include "blockrel/dyadic.hpp"

#include <algorithm>
#include <stdexcept>

namespace blockrel {

Dyadic::Dyadic(std::int64_t num, int exp) : num_(num), exp_(exp) {
    if (exp_ < 0 || exp_ > kMaxExp) throw std::overflow_error("dyadic exponent out of range");
    if (num_ == 0) {
        exp_ = 0;
        return;
    }
    while (exp_ > 0 && (num_ % 2) == 0) {
        num_ /= 2;
        --exp_;
    }
}

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
    const int e = a.exp_ > b.exp_ ? a.exp_ : b.exp_;
    const __int128 lhs = static_cast<__int128>(a.num_) << (e - a.exp_);
    const __int128 rhs = static_cast<__int128>(b.num_) << (e - b.exp_);
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

Dyadic Dyadic::midpoint(const Dyadic& a, const Dyadic& b) {
    const int e = (a.exp_ > b.exp_ ? a.exp_ : b.exp_) + 1;
    if (e > kMaxExp) throw std::overflow_error("dyadic midpoint too deep");
    const __int128 sum = (static_cast<__int128>(a.num_) << (e - 1 - a.exp_)) +
                         (static_cast<__int128>(b.num_) << (e - 1 - b.exp_));
    return Dyadic(static_cast<std::int64_t>(sum), e);
}

Dyadic Dyadic::scaled_into(const Dyadic& lo, int shift) const {
    const int e = std::max(exp_ + shift, lo.exp_);
    if (e > kMaxExp) throw std::overflow_error("dyadic scale too deep");
    const __int128 v = (static_cast<__int128>(num_) << (e - exp_ - shift)) +
                       (static_cast<__int128>(lo.num_) << (e - lo.exp_));
    return Dyadic(static_cast<std::int64_t>(v), e);
}

double Dyadic::to_double() const {
    double v = static_cast<double>(num_);
    for (int i = 0; i < exp_; ++i) v /= 2.0;
    return v;
}

std::string Dyadic::str() const {
    if (exp_ == 0) return std::to_string(num_);
    return std::to_string(num_) + "/2^" + std::to_string(exp_);
}

}  // namespace blockrel
