#include "commands.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>

using namespace blockrel;
namespace fs = std::filesystem;

namespace {

struct RunFlags {
    std::string order = "builtin:staircase";
    Stage stages = 100;
    std::string provider = "oracle";
    Stage sync = 25;
    std::string noise = "1/10";
    std::uint64_t seed = 1;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--order", f.order, "builtin:<staircase|primes|omega-eta-staircase>, expr:<type>, or file:<path>");
    cmd->add_option("--stages", f.stages, "number of stages")->check(CLI::PositiveNumber);
    cmd->add_option("--provider", f.provider, "on-relation provider")->check(CLI::IsMember({"intrinsic", "oracle"}));
    cmd->add_option("--sync", f.sync, "oracle sync period")->check(CLI::PositiveNumber);
    cmd->add_option("--noise", f.noise, "oracle noise rate, e.g. 1/10 or 0.1");
    cmd->add_option("--seed", f.seed, "presentation and provider seed");
}

RunConfig to_config(const RunFlags& f) {
    RunConfig cfg;
    cfg.order = f.order;
    cfg.stages = f.stages;
    cfg.seed = f.seed;
    cfg.provider.kind = f.provider == "oracle" ? ProviderConfig::Kind::oracle : ProviderConfig::Kind::intrinsic;
    cfg.provider.sync_period = f.sync;
    std::tie(cfg.provider.noise_num, cfg.provider.noise_den) = parse_rational(f.noise);
    cfg.provider.seed = f.seed;
    return cfg;
}

std::string in_dir(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Block-relation construction: run, verify, embed"};
    app.require_subcommand(1);

    RunFlags run_flags;
    std::string trace_path, metrics_path, out_path, checks = "all";
    std::uint32_t prefix = 0;

    auto* run = app.add_subcommand("run", "run the construction and write a trace");
    add_run_flags(run, run_flags);
    run->add_option("--trace", trace_path, "trace file (default <out>/trace.ndjson)");
    run->add_option("--metrics", metrics_path, "metrics file");
    run->add_option("--out", out_path, "output directory (default $BLOCKREL_OUT_DIR or .)");

    auto* verify = app.add_subcommand("verify", "check a trace");
    verify->add_option("trace,--trace", trace_path, "trace file");
    verify->add_option("--checks", checks, "comma-separated check ids, or all");
    verify->add_option("--prefix", prefix, "stabilization prefix (default 10)");
    verify->add_option("--out", out_path, "report file (default <dir>/report.ndjson)");

    RunFlags embed_flags;
    embed_flags.stages = 3000;
    auto* embed = app.add_subcommand("embed", "classify the order and write a self-embedding prefix");
    add_run_flags(embed, embed_flags);
    embed->add_option("--prefix", prefix, "number of elements to embed (default 20)");
    embed->add_option("--out", out_path, "embedding file (default <dir>/embedding.txt)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kUsage;
    }

    try {
        if (run->parsed()) {
            RunConfig cfg = to_config(run_flags);
            const std::string dir = out_path.empty() ? cli::default_out_dir() : out_path;
            cfg.trace = trace_path.empty() ? in_dir(dir, "trace.ndjson") : trace_path;
            cfg.metrics = metrics_path;
            return cli::cmd_run(cfg, std::cerr);
        }
        if (verify->parsed()) {
            if (trace_path.empty()) throw UsageError("verify needs a trace file");
            VerifyOptions opt;
            opt.checks = parse_check_list(checks);
            if (prefix) opt.prefix = prefix;
            const std::string report = out_path.empty() ? in_dir(cli::default_out_dir(), "report.ndjson") : out_path;
            return cli::cmd_verify(trace_path, opt, report, std::cerr);
        }
        RunConfig cfg = to_config(embed_flags);
        const std::string file = out_path.empty() ? in_dir(cli::default_out_dir(), "embedding.txt") : out_path;
        return cli::cmd_embed(cfg, prefix ? prefix : 20, file, std::cerr);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kUsage;
    }
}
