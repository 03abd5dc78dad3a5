#pragma once

// Run traces: one JSON record per event, fields in a fixed order.
//
// kinds: header, stage-begin, on-set, path-node, prune, label-remove,
// label-add, m-insert, nonblock-pair, f-snapshot, fault.
// Every record has "kind" first and "stage" second (0 for the header).

#include "json.hpp"

#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace blockrel {

using Json = nlohmann::ordered_json;

class TraceSink {
public:
    virtual ~TraceSink() = default;
    virtual void emit(const Json& event) = 0;
    virtual void flush() {}
};

/// Line-delimited JSON file writer.
class NdjsonWriter : public TraceSink {
public:
    explicit NdjsonWriter(const std::string& path);
    void emit(const Json& event) override;
    void flush() override;

private:
    std::ofstream out_;
};

class MemorySink : public TraceSink {
public:
    void emit(const Json& event) override { events.push_back(event); }
    std::vector<Json> events;
};

/// Fans events out to several sinks.
class TeeSink : public TraceSink {
public:
    void add(TraceSink* sink) { sinks_.push_back(sink); }
    void emit(const Json& event) override {
        for (auto* s : sinks_) s->emit(event);
    }
    void flush() override {
        for (auto* s : sinks_) s->flush();
    }

private:
    std::vector<TraceSink*> sinks_;
};

/// Reads a trace file; throws std::runtime_error on unreadable or malformed input.
std::vector<Json> read_trace(const std::string& path);

/// Stable textual digest (FNV-1a 64, hex) used for config provenance.
std::string fnv1a_hex(const std::string& text);

}  // namespace blockrel
