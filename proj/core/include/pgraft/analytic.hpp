#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pgraft/mixture.hpp"
#include "pgraft/prompt.hpp"
#include "pgraft/sampler.hpp"

namespace pgraft {

/// Geometry of a toy scene: where each position phrase lives and how wide the
/// layout, target and negative distributions are.
struct SceneSpec {
    std::map<std::string, Vector, std::less<>> centroids;
    double layout_stdev = 0.2;
    /// Spread of the fused (entangled) target mode, and of single-region targets.
    double target_stdev = 0.8;
    /// Spread of the per-region item modes of a multi-region target.
    double item_stdev = 0.2;
    /// Mass of the fused mode in a multi-region target. 0 drops it.
    double fused_weight = 0.95;
    double tau = 6.0;
    /// Assignment radius for evaluation; <= 0 means 3 * layout_stdev.
    double radius = 0.0;

    /// 3x3 grid with the given spacing; "" shares the center point.
    static SceneSpec defaults(double spacing = 8.0);

    double effective_radius() const noexcept { return radius > 0.0 ? radius : 3.0 * layout_stdev; }
    /// Throws InvalidArgument naming the phrase when it is not in the map.
    const Vector& centroid(std::string_view phrase) const;
    void validate() const;
};

/// Centroid of every region of the bundle, in region order.
std::vector<Vector> region_centroids(const PromptBundle& bundle, const SceneSpec& scene);

/// Layout: equal-weight tight components at the region centroids.
/// Target: one region gives a single component with target_stdev; several regions give
/// a tight item component per centroid plus the fused mode at the centroid mean.
/// Negative and unconditional: one broad component (2 * target_stdev) at the centroid mean.
MixtureSpec condition_from_bundle(const PromptBundle& bundle, const SceneSpec& scene, ConditionRole role);

/// The four conditions of a bundle with ids uncond/layout/target/negative. Mixtures are
/// attached when `scene` is given.
ConditionSet make_conditions(const PromptBundle& bundle, const SceneSpec* scene);

/// Exact mixture velocities; reads Condition::mixture.
class AnalyticBackend : public VelocityModel {
public:
    std::vector<Vector> velocities(const State& state, double t,
                                   std::span<const Condition* const> conditions) override;
    bool concurrent_safe() const override { return true; }
};

/// layout_similarity against the prompt's mixture, identity decode.
class AnalyticScorer : public SimilarityScorer {
public:
    explicit AnalyticScorer(double tau = 6.0);

    double similarity(std::span<const double> decoded, const Condition& prompt) override;
    bool concurrent_safe() const override { return true; }
    double tau() const noexcept { return m_tau; }

private:
    double m_tau;
};

}  // namespace pgraft
