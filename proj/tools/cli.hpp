// Command-line front end. Kept in a library so tests can drive it without
// spawning processes.
#ifndef VOCALSCREEN_TOOLS_CLI_HPP_
#define VOCALSCREEN_TOOLS_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace vocalscreen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// args excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vocalscreen::cli

#endif  // VOCALSCREEN_TOOLS_CLI_HPP_
