#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace blockrel {

/// Malformed TypeExpr or scripted order.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Query that needs ground truth or a capability the presentation does not have.
class Unsupported : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Internal invariant breach inside the construction. Carries the stage and a
/// textual snapshot of the offending state.
class ConstructionFault : public std::runtime_error {
public:
    ConstructionFault(std::uint32_t stage, const std::string& what, std::string snapshot = {})
        : std::runtime_error("stage " + std::to_string(stage) + ": " + what),
          stage_(stage),
          snapshot_(std::move(snapshot)) {}

    std::uint32_t stage() const { return stage_; }
    const std::string& snapshot() const { return snapshot_; }

private:
    std::uint32_t stage_;
    std::string snapshot_;
};

/// A pair already enumerated into the non-block log was found sharing a label.
class SoundnessFault : public ConstructionFault {
public:
    using ConstructionFault::ConstructionFault;
};

}  // namespace blockrel
