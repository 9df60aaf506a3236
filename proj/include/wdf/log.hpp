#pragma once

#include <iostream>
#include <sstream>
#include <string>

namespace wdf::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3 };

// Minimum level that gets printed; default info.
Level& threshold();

void write(Level level, const std::string& message);

inline void info(const std::string& msg) { write(Level::info, msg); }
inline void warn(const std::string& msg) { write(Level::warn, msg); }
inline void error(const std::string& msg) { write(Level::error, msg); }
inline void debug(const std::string& msg) { write(Level::debug, msg); }

}  // namespace wdf::log
