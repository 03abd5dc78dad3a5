#include "blockrel/config.hpp"

#include "blockrel/errors.hpp"
#include "blockrel/surgery.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace blockrel {

namespace {

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read order file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return fnv1a_hex(text.str());
}

std::uint64_t parse_uint(std::string_view s) {
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || s.empty()) throw UsageError("not a number: " + std::string(s));
    return v;
}

}  // namespace

OrderPresentation resolve_order(const std::string& spec, std::uint64_t seed) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw UsageError("order spec needs a scheme: " + spec);
    const std::string scheme = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);
    if (scheme == "builtin") {
        if (rest == "staircase") return make_presentation(staircase(), seed);
        if (rest == "primes") return make_presentation(prime_blocks(), seed);
        if (rest == "omega-eta-staircase")
            return prepend_decidable(make_presentation(staircase(), seed), omega_times_eta());
        throw UsageError("unknown builtin order '" + rest + "'");
    }
    try {
        if (scheme == "expr") return make_presentation(parse_type_expr(rest), seed);
        if (scheme == "file") return load_scripted_file(rest);
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
    throw UsageError("unknown order scheme '" + scheme + "'");
}

std::pair<std::uint64_t, std::uint64_t> parse_rational(const std::string& text) {
    if (const auto slash = text.find('/'); slash != std::string::npos) {
        const auto num = parse_uint(std::string_view(text).substr(0, slash));
        const auto den = parse_uint(std::string_view(text).substr(slash + 1));
        if (den == 0 || num > den) throw UsageError("rate must lie in [0, 1]: " + text);
        return {num, den};
    }
    if (const auto dot = text.find('.'); dot != std::string::npos) {
        const auto whole = parse_uint(dot ? std::string_view(text).substr(0, dot) : std::string_view("0"));
        const auto frac = std::string_view(text).substr(dot + 1);
        if (frac.size() > 18) throw UsageError("too many decimals: " + text);
        std::uint64_t den = 1;
        for (std::size_t k = 0; k < frac.size(); ++k) den *= 10;
        const auto num = whole * den + (frac.empty() ? 0 : parse_uint(frac));
        if (num > den) throw UsageError("rate must lie in [0, 1]: " + text);
        return {num, den};
    }
    const auto v = parse_uint(text);
    if (v > 1) throw UsageError("rate must lie in [0, 1]: " + text);
    return {v, 1};
}

Json config_json(const RunConfig& cfg) {
    Json j;
    j["order"] = cfg.order;
    if (cfg.order.rfind("file:", 0) == 0) j["order_digest"] = file_digest(cfg.order.substr(5));
    j["stages"] = cfg.stages;
    j["provider"] = cfg.provider.kind == ProviderConfig::Kind::oracle ? "oracle" : "intrinsic";
    j["sync"] = cfg.provider.sync_period;
    j["noise"] = std::to_string(cfg.provider.noise_num) + "/" + std::to_string(cfg.provider.noise_den);
    j["noise_window"] = cfg.provider.noise_window;
    j["seed"] = cfg.seed;
    return j;
}

RunConfig config_from_json(const Json& j) {
    RunConfig cfg;
    try {
        cfg.order = j.at("order").get<std::string>();
        cfg.stages = j.at("stages").get<Stage>();
        const auto kind = j.at("provider").get<std::string>();
        if (kind != "oracle" && kind != "intrinsic") throw UsageError("unknown provider '" + kind + "'");
        cfg.provider.kind = kind == "oracle" ? ProviderConfig::Kind::oracle : ProviderConfig::Kind::intrinsic;
        cfg.provider.sync_period = j.at("sync").get<Stage>();
        std::tie(cfg.provider.noise_num, cfg.provider.noise_den) = parse_rational(j.at("noise").get<std::string>());
        cfg.provider.noise_window = j.value("noise_window", Stage{0});
        cfg.seed = j.at("seed").get<std::uint64_t>();
    } catch (const Json::exception& e) {
        throw UsageError(std::string("malformed run config: ") + e.what());
    }
    cfg.provider.seed = cfg.seed;
    return cfg;
}

std::string config_hash(const RunConfig& cfg) { return fnv1a_hex(config_json(cfg).dump()); }

Json header_event(const RunConfig& cfg) {
    return Json{{"kind", "header"}, {"stage", 0}, {"config", config_json(cfg)}, {"config_hash", config_hash(cfg)}};
}

}  // namespace blockrel
