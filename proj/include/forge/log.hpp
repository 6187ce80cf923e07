#pragma once

#include <iostream>
#include <string_view>

namespace forge::log {

enum class Level { Quiet = 0, Warn = 1, Info = 2, Debug = 3 };

/// Read once from FORGE_LOG (quiet|warn|info|debug); defaults to info.
Level level();

void write(Level lvl, std::string_view msg);

inline void warn(std::string_view msg) { write(Level::Warn, msg); }
inline void info(std::string_view msg) { write(Level::Info, msg); }
inline void debug(std::string_view msg) { write(Level::Debug, msg); }

}  // namespace forge::log
