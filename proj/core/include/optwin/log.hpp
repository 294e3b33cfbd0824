#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace optwin {

// Verbosity from the OPTWIN_LOG environment variable: silent (default),
// info, or debug.
inline int log_level() {
  static int level = [] {
    const char* env = std::getenv("OPTWIN_LOG");
    if (env == nullptr) return 0;
    std::string v(env);
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
  }();
  return level;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[optwin] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[optwin:debug] " << msg << "\n";
}

}  // namespace optwin
