#pragma once

#include <mutex>
#include <string>
#include <vector>

#include <pgraft/analytic.hpp>
#include <pgraft/prompt.hpp>
#include <pgraft/sampler.hpp>

namespace fixture {

using namespace pgraft;

inline PromptBundle two_items() {
    const std::vector<ItemSpec> items{{"rice"}, {"potato salad"}};
    return compile_prompts(items);
}

inline ConditionSet two_region_conditions(const SceneSpec& scene = SceneSpec::defaults()) {
    return make_conditions(two_items(), &scene);
}

/// Every role carries the same mixture, so guidance cancels and the flow targets `spec`.
inline ConditionSet pure(const MixtureSpec& spec) {
    ConditionSet set;
    set.bundle_id = "pure";
    set.unconditional = {"uncond", "", spec};
    set.layout = {"layout", "layout", spec};
    set.target = {"target", "target", spec};
    set.negative = {"negative", "negative", spec};
    return set;
}

inline MixtureSpec single(Vector mean, double stdev) {
    MixtureSpec spec;
    spec.dim = mean.size();
    spec.components.push_back({std::move(mean), stdev, 1.0});
    return spec;
}

struct Call {
    int step;
    double t;
    std::vector<std::string> ids;
};

/// Forwards to an inner model and records every request.
class RecordingBackend : public VelocityModel {
public:
    explicit RecordingBackend(VelocityModel& inner) : m_inner(inner) {}

    std::vector<Vector> velocities(const State& state, double t,
                                   std::span<const Condition* const> conditions) override {
        Call call{state.step, t, {}};
        for (const Condition* c : conditions) {
            call.ids.push_back(c->id);
        }
        {
            std::lock_guard lock(m_mutex);
            calls.push_back(std::move(call));
        }
        return m_inner.velocities(state, t, conditions);
    }
    bool concurrent_safe() const override { return m_inner.concurrent_safe(); }

    std::vector<Call> calls;

private:
    VelocityModel& m_inner;
    std::mutex m_mutex;
};

/// Scorer returning a fixed sequence, one value per call.
class ScriptedScorer : public SimilarityScorer {
public:
    explicit ScriptedScorer(std::vector<double> scores) : m_scores(std::move(scores)) {}

    double similarity(std::span<const double>, const Condition&) override {
        const double v = m_scores.at(std::min(m_next, m_scores.size() - 1));
        ++m_next;
        return v;
    }
    std::size_t calls() const { return m_next; }

private:
    std::vector<double> m_scores;
    std::size_t m_next = 0;
};

}  // namespace fixture
