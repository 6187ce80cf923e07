#include "forge/log.hpp"

#include <cstdlib>
#include <string>

namespace forge::log {

Level level() {
  static const Level cached = [] {
    const char* env = std::getenv("FORGE_LOG");
    if (env == nullptr) return Level::Info;
    const std::string v(env);
    if (v == "quiet") return Level::Quiet;
    if (v == "warn") return Level::Warn;
    if (v == "debug") return Level::Debug;
    return Level::Info;
  }();
  return cached;
}

void write(Level lvl, std::string_view msg) {
  if (static_cast<int>(lvl) > static_cast<int>(level())) return;
  const char* tag = lvl == Level::Warn ? "warning: " : "";
  std::cerr << tag << msg << '\n';
}

}  // namespace forge::log
