#pragma once

// The three subcommands, callable without the argument parser.

#include "blockrel/config.hpp"
#include "blockrel/verify.hpp"

#include <iosfwd>
#include <string>

namespace blockrel::cli {

inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kUsage = 2;
inline constexpr int kFault = 3;

/// Name of the environment variable holding the default output directory.
inline constexpr const char* kOutDirEnv = "BLOCKREL_OUT_DIR";
/// $BLOCKREL_OUT_DIR, or "." when unset.
std::string default_out_dir();

/// Runs the construction for cfg.stages stages. Writes the trace (header first)
/// and, when cfg.metrics is set, a metrics file. A construction fault writes a
/// snapshot next to the trace and returns kFault.
int cmd_run(const RunConfig& cfg, std::ostream& log);

/// Checks a trace and writes the report (stdout when report_path is empty).
int cmd_verify(const std::string& trace_path, const VerifyOptions& opt, const std::string& report_path,
               std::ostream& log);

/// Classifies the order and writes an embedding of the first k elements.
int cmd_embed(const RunConfig& cfg, std::uint32_t k, const std::string& out_path, std::ostream& log);

}  // namespace blockrel::cli
