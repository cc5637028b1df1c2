#include "scenario.hpp"

#include <pgraft/analytic.hpp>
#include <pgraft/errors.hpp>
#include <pgraft/log.hpp>

namespace pgraft::app {

PromptBundle compile_bundle(const PromptSettings& prompts) {
    const auto items = item_specs(prompts);
    try {
        return compile_prompts(items, prompts.groups);
    } catch (const InvalidArgument& e) {
        throw ConfigError("prompts", e.what());
    }
}

namespace {

ConditionSet analytic_conditions(const PromptBundle& bundle, const SceneSpec& scene) {
    try {
        return make_conditions(bundle, &scene);
    } catch (const InvalidArgument& e) {
        throw ConfigError("scene.centroids", e.what());
    }
}

}  // namespace

Scenario build_scenario(const RunConfig& config) {
    Scenario s;
    s.bundle = compile_bundle(config.prompts);
    try {
        s.centroids = region_centroids(s.bundle, config.scene);
    } catch (const InvalidArgument&) {
        s.centroids.clear();
    }

    if (config.backend.kind == BackendSettings::Kind::Analytic) {
        s.conditions = analytic_conditions(s.bundle, config.scene);
        s.backend = std::make_unique<AnalyticBackend>();
        s.scorer = std::make_unique<AnalyticScorer>(config.scene.tau);
        return s;
    }

    s.conditions = make_conditions(s.bundle, nullptr);
    s.client = std::make_unique<RemoteClient>(config.backend.remote);
    auto backend = std::make_unique<RemoteBackend>(*s.client);
    if (backend->health().latent_size() != config.sampler.dim) {
        throw ConfigError("sampler.dim", "server latent size is " + std::to_string(backend->health().latent_size()) +
                                             ", config asks for " + std::to_string(config.sampler.dim));
    }
    s.scorer = std::make_unique<RemoteScorer>(*s.client, backend->health().concurrent_safe);
    s.backend = std::move(backend);
    return s;
}

StubOptions stub_options(const RunConfig& config) {
    const PromptBundle bundle = compile_bundle(config.prompts);
    const ConditionSet set = analytic_conditions(bundle, config.scene);
    StubOptions options;
    options.mode = StubOptions::Mode::Analytic;
    options.tau = config.scene.tau;
    options.latent_shape = {2};
    for (const Condition* c : {&set.unconditional, &set.layout, &set.target, &set.negative}) {
        if (!options.mixtures.emplace(c->text, *c->mixture).second) {
            log()->warn("condition '{}' shares its text with another role; serving the first mixture", c->id);
        }
    }
    return options;
}

}  // namespace pgraft::app
