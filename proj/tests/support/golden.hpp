#pragma once

// Golden run configurations; their traces live in fixtures/golden/<name>.ndjson.

#include "blockrel/on_provider.hpp"
#include "blockrel/order.hpp"

#include <string>
#include <vector>

namespace testsupport {

struct GoldenRun {
    std::string name;
    bool primes = false;
    std::uint64_t seed = 0;
    blockrel::ProviderConfig::Kind provider = blockrel::ProviderConfig::Kind::oracle;
    blockrel::Stage sync = 10;
    blockrel::Stage stages = 40;

    blockrel::OrderPresentation presentation() const {
        return blockrel::make_presentation(primes ? blockrel::prime_blocks() : blockrel::staircase(), seed);
    }
    blockrel::ProviderConfig provider_config() const {
        blockrel::ProviderConfig cfg;
        cfg.kind = provider;
        cfg.sync_period = sync;
        cfg.seed = seed;
        return cfg;
    }
};

inline std::vector<GoldenRun> golden_runs() {
    using K = blockrel::ProviderConfig::Kind;
    return {
        {"run1", false, 7, K::oracle, 10, 40},
        {"run2", true, 3, K::oracle, 10, 50},
        {"run3", false, 2, K::intrinsic, 10, 60},
    };
}

}  // namespace testsupport
