#include "freqfed/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace freqfed {

LogLevel log_threshold() {
    static LogLevel level = [] {
        const char* env = std::getenv("FREQFED_LOG");
        if (env != nullptr) {
            if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
            if (std::strcmp(env, "info") == 0) return LogLevel::info;
        }
        return LogLevel::warn;
    }();
    return level;
}

void log_message(LogLevel level, const std::string& msg) {
    if (level < log_threshold()) return;
    const char* tag = level == LogLevel::debug ? "debug" : level == LogLevel::info ? "info" : "warn";
    std::fprintf(stderr, "[freqfed %s] %s\n", tag, msg.c_str());
}

}  // namespace freqfed
