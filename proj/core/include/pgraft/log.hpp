#pragma once

#include <memory>

#include <spdlog/spdlog.h>

namespace pgraft {

/// Library logger. Level comes from GRAFT_SAMPLER_LOG (trace|debug|info|warn|error|off), default warn.
std::shared_ptr<spdlog::logger> log();

}  // namespace pgraft
