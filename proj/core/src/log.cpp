#include "pgraft/log.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace pgraft {

std::shared_ptr<spdlog::logger> log() {
    static const std::shared_ptr<spdlog::logger> logger = [] {
        auto l = spdlog::stderr_color_mt("pgraft");
        auto level = spdlog::level::warn;
        if (const char* env = std::getenv("GRAFT_SAMPLER_LOG")) {
            level = spdlog::level::from_str(env);
        }
        l->set_level(level);
        l->set_pattern("[%l] %v");
        return l;
    }();
    return logger;
}

}  // namespace pgraft
