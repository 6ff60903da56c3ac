#include "hbmsim/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace hbmsim::log {

Level level() {
    static const Level cached = [] {
        const char* env = std::getenv("HBMSIM_LOG");
        if (env == nullptr) return Level::warn;
        if (std::strcmp(env, "quiet") == 0) return Level::quiet;
        if (std::strcmp(env, "info") == 0) return Level::info;
        if (std::strcmp(env, "debug") == 0) return Level::debug;
        return Level::warn;
    }();
    return cached;
}

namespace {

void emit(Level at, const char* tag, const std::string& message) {
    if (level() >= at) {
        std::fprintf(stderr, "[%s] %s\n", tag, message.c_str());
    }
}

} // namespace

void warn(const std::string& message) { emit(Level::warn, "warn", message); }
void info(const std::string& message) { emit(Level::info, "info", message); }
void debug(const std::string& message) { emit(Level::debug, "debug", message); }

} // namespace hbmsim::log
