#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace blechannel::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `blechannel` tool. args[0] is the program name.
// Subcommands: simulate, classify, calibrate, accuracy, matrix, ranging.
// `--config <file>` splices key = value lines (keys are flag names without
// dashes; [section] headers select a subcommand) in front of the command-line
// flags, so explicit flags win. BLECHANNEL_SEED supplies --seed when neither
// the command line nor the config file does.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace blechannel::harness
