#ifndef RELPARSE_CLI_H_
#define RELPARSE_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace relparse {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

// Subcommands: gen-candidates, train, eval, parse, synth. `args` excludes
// the program name. A --config file of key=value lines supplies any option
// not given as a flag.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// key=value lines; '#' starts a comment. Throws InputError on malformed lines.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

}  // namespace relparse

#endif  // RELPARSE_CLI_H_
