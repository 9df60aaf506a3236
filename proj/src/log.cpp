#include "wdf/log.hpp"

namespace wdf::log {

Level& threshold() {
    static Level level = Level::info;
    return level;
}

void write(Level level, const std::string& message) {
    if (level < threshold()) return;
    static const char* names[] = {"debug", "info", "warn", "error"};
    std::cerr << "[" << names[static_cast<int>(level)] << "] " << message << "\n";
}

}  // namespace wdf::log
