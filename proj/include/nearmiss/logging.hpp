#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace nearmiss {

// NEARMISS_LOG_LEVEL in {error, info, debug}; diagnostics only, never outputs.
inline int log_level() {
    static const int level = [] {
        const char* env = std::getenv("NEARMISS_LOG_LEVEL");
        if (!env) return 0;
        if (std::strcmp(env, "debug") == 0) return 2;
        if (std::strcmp(env, "info") == 0) return 1;
        return 0;
    }();
    return level;
}

inline void log_error(const std::string& msg) {
    std::fprintf(stderr, "[nearmiss:error] %s\n", msg.c_str());
}

inline void log_info(const std::string& msg) {
    if (log_level() >= 1) std::fprintf(stderr, "[nearmiss:info] %s\n", msg.c_str());
}

inline void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::fprintf(stderr, "[nearmiss:debug] %s\n", msg.c_str());
}

} // namespace nearmiss
