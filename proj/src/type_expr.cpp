#include "blockrel/errors.hpp"
#include "blockrel/order.hpp"

#include <cctype>
#include <sstream>

namespace blockrel {

TypeExpr fin(std::uint32_t k) { return TypeExpr{Fin{k}}; }
TypeExpr omega() { return TypeExpr{Omega{}}; }
TypeExpr omega_star() { return TypeExpr{OmegaStar{}}; }
TypeExpr zeta() { return TypeExpr{Zeta{}}; }
TypeExpr sum(std::vector<TypeExpr> parts) { return TypeExpr{Sum{std::move(parts)}}; }
TypeExpr eta_shuffle(std::vector<TypeExpr> descriptors, std::uint32_t stride) {
    return TypeExpr{EtaShuffle{std::move(descriptors), stride}};
}
TypeExpr omega_times_eta() { return TypeExpr{OmegaTimesEta{}}; }
TypeExpr prime_blocks(std::vector<ToggleEntry> script) {
    return TypeExpr{PrimeBlockReplacement{std::move(script)}};
}
TypeExpr staircase() { return eta_shuffle({fin(1)}, 1); }

namespace {

bool is_single_block(const TypeExpr& e) {
    return std::holds_alternative<Fin>(e.node) || std::holds_alternative<Omega>(e.node) ||
           std::holds_alternative<OmegaStar>(e.node) || std::holds_alternative<Zeta>(e.node);
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void validate(const TypeExpr& expr) {
    std::visit(overloaded{
                   [](const Fin& f) {
                       if (f.k == 0) throw ValidationError("Fin(k) requires k >= 1");
                   },
                   [](const Sum& s) {
                       if (s.parts.empty()) throw ValidationError("Sum requires at least one part");
                       for (const auto& p : s.parts) validate(p);
                   },
                   [](const EtaShuffle& s) {
                       if (s.descriptors.empty())
                           throw ValidationError("EtaShuffle descriptor list must be nonempty");
                       for (const auto& d : s.descriptors) {
                           validate(d);
                           if (!is_single_block(d))
                               throw ValidationError("EtaShuffle descriptors must be single blocks");
                       }
                   },
                   [](const PrimeBlockReplacement& p) {
                       for (std::size_t i = 1; i < p.script.size(); ++i)
                           if (p.script[i].stage <= p.script[i - 1].stage)
                               throw ValidationError("toggle script stages must be strictly increasing");
                       for (const auto& t : p.script)
                           if (t.position == 0) throw ValidationError("toggle positions are 1-based");
                   },
                   [](const auto&) {},
               },
               expr.node);
}

std::string to_string(const TypeExpr& expr) {
    auto join = [](const std::vector<TypeExpr>& v) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ",";
            out += to_string(v[i]);
        }
        return out;
    };
    return std::visit(
        overloaded{
            [](const Fin& f) { return "fin(" + std::to_string(f.k) + ")"; },
            [](const Omega&) { return std::string("omega"); },
            [](const OmegaStar&) { return std::string("omegastar"); },
            [](const Zeta&) { return std::string("zeta"); },
            [&](const Sum& s) { return "sum(" + join(s.parts) + ")"; },
            [&](const EtaShuffle& s) {
                std::string head = "shuffle";
                if (s.stride) head += "+" + std::to_string(s.stride);
                return head + "(" + join(s.descriptors) + ")";
            },
            [](const OmegaTimesEta&) { return std::string("omegaeta"); },
            [](const PrimeBlockReplacement& p) {
                std::string out = "primes";
                if (!p.script.empty()) {
                    out += "[";
                    for (std::size_t i = 0; i < p.script.size(); ++i) {
                        if (i) out += ",";
                        out += std::to_string(p.script[i].stage) + ":" +
                               std::to_string(p.script[i].position) + ":" +
                               (p.script[i].member ? "1" : "0");
                    }
                    out += "]";
                }
                return out;
            },
        },
        expr.node);
}

namespace {

class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    TypeExpr parse() {
        TypeExpr e = expr();
        skip_ws();
        if (pos_ != s_.size()) fail("trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ValidationError("type expression: " + what + " at offset " + std::to_string(pos_) +
                              " in '" + s_ + "'");
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }

    std::string ident() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        return s_.substr(start, pos_ - start);
    }

    std::uint64_t number() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("expected number");
        return std::stoull(s_.substr(start, pos_ - start));
    }

    std::vector<TypeExpr> list() {
        std::vector<TypeExpr> out;
        expect('(');
        out.push_back(expr());
        while (eat(',')) out.push_back(expr());
        expect(')');
        return out;
    }

    TypeExpr expr() {
        const std::string id = ident();
        if (id == "fin") {
            expect('(');
            auto k = number();
            expect(')');
            return fin(static_cast<std::uint32_t>(k));
        }
        if (id == "omega") return omega();
        if (id == "omegastar") return omega_star();
        if (id == "zeta") return zeta();
        if (id == "omegaeta") return omega_times_eta();
        if (id == "staircase") return staircase();
        if (id == "sum") return sum(list());
        if (id == "shuffle") {
            std::uint32_t stride = 0;
            if (eat('+')) stride = static_cast<std::uint32_t>(number());
            return eta_shuffle(list(), stride);
        }
        if (id == "primes") {
            std::vector<ToggleEntry> script;
            if (eat('[')) {
                if (!eat(']')) {
                    do {
                        ToggleEntry t;
                        t.stage = static_cast<Stage>(number());
                        expect(':');
                        t.position = static_cast<std::uint32_t>(number());
                        expect(':');
                        t.member = number() != 0;
                        script.push_back(t);
                    } while (eat(','));
                    expect(']');
                }
            }
            return prime_blocks(std::move(script));
        }
        fail("unknown type '" + id + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

TypeExpr parse_type_expr(const std::string& text) {
    TypeExpr e = Parser(text).parse();
    validate(e);
    return e;
}

std::string to_string(Condensation c) {
    switch (c) {
        case Condensation::eta: return "eta";
        case Condensation::one_eta: return "1+eta";
        case Condensation::eta_one: return "eta+1";
        case Condensation::one_eta_one: return "1+eta+1";
        case Condensation::other: return "other";
    }
    return "other";
}

}  // namespace blockrel
