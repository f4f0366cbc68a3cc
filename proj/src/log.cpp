#include "elevleak/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace elevleak::log {

Level threshold() {
    static const Level cached = [] {
        const char* env = std::getenv("ELEVLEAK_LOG");
        if (!env) return Level::warn;
        if (std::strcmp(env, "error") == 0 || std::strcmp(env, "0") == 0) return Level::error;
        if (std::strcmp(env, "warn") == 0 || std::strcmp(env, "1") == 0) return Level::warn;
        if (std::strcmp(env, "info") == 0 || std::strcmp(env, "2") == 0) return Level::info;
        if (std::strcmp(env, "debug") == 0 || std::strcmp(env, "3") == 0) return Level::debug;
        return Level::warn;
    }();
    return cached;
}

void write(Level level, const std::string& msg) {
    if (level > threshold()) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(level)], msg.c_str());
}

} // namespace elevleak::log
