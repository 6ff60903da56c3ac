#pragma once

#include <string>

namespace hbmsim::log {

enum class Level { quiet = 0, warn = 1, info = 2, debug = 3 };

/// Current verbosity, read once from the HBMSIM_LOG environment variable
/// (quiet|warn|info|debug). Defaults to warn.
Level level();

void warn(const std::string& message);
void info(const std::string& message);
void debug(const std::string& message);

} // namespace hbmsim::log
