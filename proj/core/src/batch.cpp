#include "pgraft/batch.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <thread>

#include "pgraft/log.hpp"

namespace pgraft {

std::vector<Trajectory> sample_batch(const SamplerConfig& config, const ConditionSet& conditions,
                                     VelocityModel& backend, SimilarityScorer* scorer, const GraftPolicy& policy,
                                     std::size_t count, std::size_t workers) {
    const bool parallel = backend.concurrent_safe() && (scorer == nullptr || scorer->concurrent_safe());
    if (!parallel && workers > 1) {
        log()->info("backend is not concurrent-safe; running {} trajectories sequentially", count);
    }
    workers = parallel ? std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1)) : 1;

    std::vector<std::optional<Trajectory>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};

    auto work = [&] {
        for (std::size_t i = next++; i < count && !failed; i = next++) {
            SamplerConfig run = config;
            run.seed = config.seed + i;
            try {
                slots[i] = sample(run, conditions, backend, scorer, policy);
            } catch (...) {
                errors[i] = std::current_exception();
                failed = true;
            }
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
    }

    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    std::vector<Trajectory> out;
    out.reserve(count);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

}  // namespace pgraft
