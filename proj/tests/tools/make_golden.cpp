// Regenerates the golden traces from the straight-line interpreter.
// usage: make_golden <fixture-dir>

#include "support/golden.hpp"
#include "support/replay.hpp"

#include <cstdio>

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: make_golden <fixture-dir>\n");
        return 2;
    }
    for (const auto& run : testsupport::golden_runs()) {
        const auto p = run.presentation();
        testsupport::Replay replay(p, blockrel::make_provider(p, run.provider_config()));
        const auto events = replay.run(run.stages);
        blockrel::NdjsonWriter out(std::string(argv[1]) + "/" + run.name + ".ndjson");
        for (const auto& ev : events) out.emit(ev);
        out.flush();
        std::printf("%s: %zu events\n", run.name.c_str(), events.size());
    }
}
