#pragma once

#include <string>

namespace freqfed {

enum class LogLevel { debug = 0, info = 1, warn = 2 };

/// Global log threshold, initialized from the FREQFED_LOG environment
/// variable ("debug" or "info"; anything else keeps the default "warn").
LogLevel log_threshold();

void log_message(LogLevel level, const std::string& msg);

inline void log_debug(const std::string& msg) { log_message(LogLevel::debug, msg); }
inline void log_info(const std::string& msg) { log_message(LogLevel::info, msg); }
inline void log_warn(const std::string& msg) { log_message(LogLevel::warn, msg); }

}  // namespace freqfed
