#pragma once

#include <memory>
#include <vector>

#include <pgraft/remote.hpp>
#include <pgraft/sampler.hpp>
#include <pgraft/stub_server.hpp>

#include "run_config.hpp"

namespace pgraft::app {

/// Everything a run needs, built from a validated RunConfig.
struct Scenario {
    PromptBundle bundle;
    ConditionSet conditions;
    std::vector<Vector> centroids;  ///< empty when the scene lacks a region phrase
    std::unique_ptr<RemoteClient> client;
    std::unique_ptr<VelocityModel> backend;
    std::unique_ptr<SimilarityScorer> scorer;
};

PromptBundle compile_bundle(const PromptSettings& prompts);
Scenario build_scenario(const RunConfig& config);

/// Analytic stub options serving the bundle's four conditions.
StubOptions stub_options(const RunConfig& config);

}  // namespace pgraft::app
