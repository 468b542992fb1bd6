// Command-line driver: one subcommand per study type, flat key-value config
// files, CSV outputs, and the documented exit-code contract (0 ok, 1 config,
// 2 numerical failure, 3 threshold failure).

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "vfl/vfl.hpp"

namespace {

void usage(std::FILE* to) {
    std::fprintf(to,
                 "usage: vfl <command> --config <path> [--out <dir>] [--seed N]\n"
                 "\n"
                 "commands:\n"
                 "  simulate         run a time integration and stream diagnostics CSV\n"
                 "  check-invariants evaluate every residual on the initial data\n"
                 "  mms-convergence  manufactured-solution refinement study\n"
                 "  lame-test        analytic and residual checks of the Lame solver\n"
                 "  stability-probe  run deliberately past the CFL bound\n"
                 "\n"
                 "VFL_THREADS caps internal parallelism (default 1).\n");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc >= 2 && (std::string(argv[1]) == "--help" || std::string(argv[1]) == "-h")) {
        usage(stdout);
        return vfl::kExitOk;
    }
    if (argc < 2) {
        usage(stderr);
        std::fprintf(stderr, "vfl: kind=config msg=\"missing command\"\n");
        return vfl::kExitConfig;
    }

    const auto command = vfl::command_from_string(argv[1]);
    if (!command) {
        std::fprintf(stderr, "vfl: kind=config msg=\"unknown command '%s'\"\n", argv[1]);
        return vfl::kExitConfig;
    }

    std::string config_path, out_dir;
    std::optional<long> seed;
    for (int i = 2; i < argc; ++i) {
        const std::string arg = argv[i];
        auto value = [&]() -> const char* {
            if (i + 1 >= argc) {
                std::fprintf(stderr, "vfl: kind=config msg=\"%s needs a value\"\n", arg.c_str());
                std::exit(vfl::kExitConfig);
            }
            return argv[++i];
        };
        if (arg == "--config") config_path = value();
        else if (arg == "--out") out_dir = value();
        else if (arg == "--seed") seed = std::strtol(value(), nullptr, 10);
        else {
            std::fprintf(stderr, "vfl: kind=config msg=\"unknown option '%s'\"\n", arg.c_str());
            return vfl::kExitConfig;
        }
    }
    if (config_path.empty()) {
        std::fprintf(stderr, "vfl: kind=config msg=\"--config is required\"\n");
        return vfl::kExitConfig;
    }

    std::ifstream in(config_path);
    if (!in) {
        std::fprintf(stderr, "vfl: kind=config msg=\"cannot read config file %s\"\n",
                     config_path.c_str());
        return vfl::kExitConfig;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();

    vfl::RunConfig cfg;
    try {
        cfg = vfl::parse_config(buffer.str(), command);
    } catch (const vfl::ConfigError& e) {
        std::fprintf(stderr, "vfl: kind=config msg=\"%s\"\n", e.what());
        return vfl::kExitConfig;
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed) cfg.seed = *seed;
    return vfl::run(cfg);
}
