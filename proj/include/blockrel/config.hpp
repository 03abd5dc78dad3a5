#pragma once

// Run configuration shared by the command-line tool and the trace verifier.

#include "blockrel/on_provider.hpp"
#include "blockrel/order.hpp"
#include "blockrel/trace.hpp"

#include <stdexcept>
#include <string>

namespace blockrel {

/// Bad command-line input or an order spec that cannot be resolved.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Everything that determines a run. Output paths are not part of the identity.
struct RunConfig {
    /// builtin:<staircase|primes|omega-eta-staircase>, expr:<type expression>,
    /// or file:<scripted order path>.
    std::string order = "builtin:staircase";
    Stage stages = 100;
    ProviderConfig provider;  // provider.seed is kept equal to seed
    std::uint64_t seed = 1;
    std::string trace;
    std::string metrics;
};

/// Builds the presentation named by an order spec; throws UsageError.
OrderPresentation resolve_order(const std::string& spec, std::uint64_t seed);

/// Parses "1/10", "0.1" or "0"; throws UsageError.
std::pair<std::uint64_t, std::uint64_t> parse_rational(const std::string& text);

/// Canonical serialization; scripted files contribute a digest of their contents.
Json config_json(const RunConfig& cfg);
RunConfig config_from_json(const Json& j);
std::string config_hash(const RunConfig& cfg);

/// The first trace record of a run.
Json header_event(const RunConfig& cfg);

}  // namespace blockrel
