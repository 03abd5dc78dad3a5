#include "blockrel/trace.hpp"

#include <cstdio>
#include <stdexcept>

namespace blockrel {

NdjsonWriter::NdjsonWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write trace '" + path + "'");
}

void NdjsonWriter::emit(const Json& event) { out_ << event.dump() << '\n'; }

void NdjsonWriter::flush() { out_.flush(); }

std::vector<Json> read_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read trace '" + path + "'");
    std::vector<Json> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            out.push_back(Json::parse(line));
        } catch (const Json::parse_error& e) {
            throw std::runtime_error("trace line " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace blockrel
