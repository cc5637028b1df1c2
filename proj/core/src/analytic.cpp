#include "pgraft/analytic.hpp"

#include <cmath>

#include "pgraft/errors.hpp"

namespace pgraft {

SceneSpec SceneSpec::defaults(double spacing) {
    SceneSpec scene;
    const auto grid = assign_positions(kMaxRegions);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double col = static_cast<double>(i % 3) - 1.0;
        const double row = 1.0 - static_cast<double>(i / 3);
        scene.centroids[grid[i]] = {col * spacing, row * spacing};
    }
    scene.centroids[""] = {0.0, 0.0};
    return scene;
}

const Vector& SceneSpec::centroid(std::string_view phrase) const {
    const auto it = centroids.find(phrase);
    if (it == centroids.end()) {
        throw InvalidArgument("scene has no centroid for position phrase '" + std::string(phrase) + "'");
    }
    return it->second;
}

void SceneSpec::validate() const {
    if (centroids.empty()) {
        throw InvalidArgument("scene has no centroids");
    }
    for (const auto& [phrase, point] : centroids) {
        if (point.size() != 2 || !std::isfinite(point[0]) || !std::isfinite(point[1])) {
            throw InvalidArgument("centroid for '" + phrase + "' must be a finite 2-D point");
        }
    }
    // "" is an alias of the center and may share its point.
    for (auto a = centroids.begin(); a != centroids.end(); ++a) {
        for (auto b = std::next(a); b != centroids.end(); ++b) {
            if (a->first.empty() || b->first.empty()) {
                continue;
            }
            if (a->second == b->second) {
                throw InvalidArgument("centroids '" + a->first + "' and '" + b->first + "' coincide");
            }
        }
    }
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw InvalidArgument(std::string(name) + " must be positive");
        }
    };
    positive(layout_stdev, "layout_stdev");
    positive(target_stdev, "target_stdev");
    positive(item_stdev, "item_stdev");
    positive(tau, "tau");
    if (!(fused_weight >= 0.0 && fused_weight < 1.0)) {
        throw InvalidArgument("fused_weight must be in [0, 1)");
    }
}

std::vector<Vector> region_centroids(const PromptBundle& bundle, const SceneSpec& scene) {
    std::vector<Vector> out;
    out.reserve(bundle.regions.positions.size());
    for (const auto& phrase : bundle.regions.positions) {
        out.push_back(scene.centroid(phrase));
    }
    return out;
}

MixtureSpec condition_from_bundle(const PromptBundle& bundle, const SceneSpec& scene, ConditionRole role) {
    const auto points = region_centroids(bundle, scene);
    if (points.empty()) {
        throw InvalidArgument("bundle has no regions");
    }
    const auto n = static_cast<double>(points.size());
    Vector center(2, 0.0);
    for (const auto& p : points) {
        center[0] += p[0] / n;
        center[1] += p[1] / n;
    }

    MixtureSpec spec;
    spec.dim = 2;
    switch (role) {
    case ConditionRole::Layout:
        for (const auto& p : points) {
            spec.components.push_back({p, scene.layout_stdev, 1.0 / n});
        }
        break;
    case ConditionRole::Target:
        if (points.size() == 1) {
            spec.components.push_back({points.front(), scene.target_stdev, 1.0});
            break;
        }
        for (const auto& p : points) {
            spec.components.push_back({p, scene.item_stdev, (1.0 - scene.fused_weight) / n});
        }
        if (scene.fused_weight > 0.0) {
            spec.components.push_back({center, scene.target_stdev, scene.fused_weight});
        }
        break;
    case ConditionRole::Negative:
    case ConditionRole::Unconditional:
        spec.components.push_back({center, 2.0 * scene.target_stdev, 1.0});
        break;
    }
    spec.validate();
    return spec;
}

ConditionSet make_conditions(const PromptBundle& bundle, const SceneSpec* scene) {
    ConditionSet set;
    set.bundle_id = bundle.id();
    set.unconditional = {"uncond", "", std::nullopt};
    set.layout = {"layout", bundle.layout, std::nullopt};
    set.target = {"target", bundle.target, std::nullopt};
    set.negative = {"negative", bundle.negative, std::nullopt};
    if (scene != nullptr) {
        set.unconditional.mixture = condition_from_bundle(bundle, *scene, ConditionRole::Unconditional);
        set.layout.mixture = condition_from_bundle(bundle, *scene, ConditionRole::Layout);
        set.target.mixture = condition_from_bundle(bundle, *scene, ConditionRole::Target);
        set.negative.mixture = condition_from_bundle(bundle, *scene, ConditionRole::Negative);
    }
    return set;
}

std::vector<Vector> AnalyticBackend::velocities(const State& state, double t,
                                                std::span<const Condition* const> conditions) {
    std::vector<Vector> out;
    out.reserve(conditions.size());
    for (const Condition* c : conditions) {
        if (!c->mixture) {
            throw BackendError("condition '" + c->id + "' carries no mixture");
        }
        out.push_back(mixture_velocity(state.data, t, *c->mixture));
    }
    return out;
}

AnalyticScorer::AnalyticScorer(double tau) : m_tau(tau) {
    if (!(tau > 0.0)) {
        throw InvalidArgument("tau must be positive");
    }
}

double AnalyticScorer::similarity(std::span<const double> decoded, const Condition& prompt) {
    if (!prompt.mixture) {
        throw ScorerError("prompt '" + prompt.id + "' carries no mixture");
    }
    return layout_similarity(decoded, *prompt.mixture, m_tau);
}

}  // namespace pgraft
