#pragma once

#include <cstddef>
#include <vector>

#include "pgraft/sampler.hpp"

namespace pgraft {

/// `count` trajectories, trajectory i seeded with config.seed + i, returned in index order.
/// Runs on `workers` threads only when the backend (and scorer, if any) is concurrent-safe;
/// otherwise sequentially. The lowest-index failure is rethrown once all workers stop.
std::vector<Trajectory> sample_batch(const SamplerConfig& config, const ConditionSet& conditions,
                                     VelocityModel& backend, SimilarityScorer* scorer, const GraftPolicy& policy,
                                     std::size_t count, std::size_t workers = 1);

}  // namespace pgraft
