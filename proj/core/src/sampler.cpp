#include "pgraft/sampler.hpp"

#include <array>
#include <cmath>

#include "pgraft/log.hpp"
#include "pgraft/rng.hpp"

namespace pgraft {

void SamplerConfig::validate() const {
    if (total_steps < 1) {
        throw ConfigError("sampler.steps", "must be >= 1");
    }
    if (!std::isfinite(guidance) || guidance < 0.0) {
        throw ConfigError("sampler.guidance", "must be finite and >= 0");
    }
    if (dim == 0) {
        throw ConfigError("sampler.dim", "must be >= 1");
    }
}

const char* to_string(ConditionRole role) noexcept {
    switch (role) {
    case ConditionRole::Unconditional:
        return "uncond";
    case ConditionRole::Layout:
        return "layout";
    case ConditionRole::Target:
        return "target";
    case ConditionRole::Negative:
        return "negative";
    }
    return "?";
}

const Condition& ConditionSet::get(ConditionRole role) const noexcept {
    switch (role) {
    case ConditionRole::Unconditional:
        return unconditional;
    case ConditionRole::Layout:
        return layout;
    case ConditionRole::Target:
        return target;
    case ConditionRole::Negative:
        break;
    }
    return negative;
}

State init_state(const SamplerConfig& config) {
    if (config.dim == 0) {
        throw InvalidArgument("state dimension must be positive");
    }
    State state;
    state.data.resize(config.dim);
    NormalSampler(config.seed).fill(state.data);
    return state;
}

Vector guided_velocity(std::span<const double> v_uncond, std::span<const double> v_cond,
                       std::span<const double> v_neg, double omega) {
    if (v_cond.size() != v_uncond.size() || v_neg.size() != v_uncond.size()) {
        throw InvalidArgument("guidance inputs differ in dimension: uncond " + std::to_string(v_uncond.size()) +
                              ", cond " + std::to_string(v_cond.size()) + ", neg " +
                              std::to_string(v_neg.size()));
    }
    if (!(omega >= 0.0)) {
        throw InvalidArgument("guidance scale must be >= 0");
    }
    Vector out(v_uncond.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = v_uncond[i] + omega * (v_cond[i] - v_neg[i]);
    }
    return out;
}

State euler_step(const State& x, std::span<const double> velocity, double gamma) {
    if (velocity.size() != x.dim()) {
        throw InvalidArgument("velocity has dimension " + std::to_string(velocity.size()) + ", state has " +
                              std::to_string(x.dim()));
    }
    State next;
    next.step = x.step + 1;
    next.data.resize(x.dim());
    for (std::size_t i = 0; i < x.dim(); ++i) {
        if (!std::isfinite(velocity[i])) {
            throw NumericFailure(x.step, "non-finite velocity component " + std::to_string(i));
        }
        next.data[i] = x.data[i] + gamma * velocity[i];
    }
    return next;
}

namespace {

class Run {
public:
    Run(const SamplerConfig& config, const ConditionSet& conditions, VelocityModel& backend,
        SimilarityScorer* scorer, const GraftPolicy& policy)
        : m_config(config), m_conditions(conditions), m_backend(backend), m_scorer(scorer), m_policy(policy) {}

    Trajectory operator()() {
        m_config.validate();
        m_policy.validate(m_config.total_steps);
        if (m_policy.is_dynamic() && m_scorer == nullptr) {
            throw InvalidArgument("dynamic graft policy needs a similarity scorer");
        }

        m_traj.config = m_config;
        m_traj.bundle_id = m_conditions.bundle_id;
        m_traj.states.reserve(static_cast<std::size_t>(m_config.total_steps) + 1);
        m_traj.schedule.reserve(static_cast<std::size_t>(m_config.total_steps));
        m_traj.states.push_back(init_state(m_config));

        if (m_policy.is_dynamic()) {
            m_window = window_bounds(m_policy, m_config.total_steps);
        } else {
            m_traj.graft_step = m_policy.fixed_step;
        }

        for (int s = 0; s < m_config.total_steps; ++s) {
            if (!m_traj.graft_step) {
                detect(s);
            }
            advance(s);
        }
        if (!m_traj.graft_step) {
            // Window reaches the terminal step.
            detect(m_config.total_steps);
            m_traj.graft_step = m_config.total_steps;
        }
        return std::move(m_traj);
    }

private:
    [[noreturn]] void abort(SamplingAborted::Cause cause, int step, const std::string& message) {
        throw SamplingAborted(cause, step, message, std::move(m_traj));
    }

    void detect(int s) {
        if (m_scorer_failed) {
            if (s >= m_window.t_max) {
                m_traj.graft_step = s;
            }
            return;
        }
        if (s < m_window.t_min || s > m_window.t_max) {
            return;
        }
        double score = 0.0;
        try {
            const Vector decoded = m_scorer->decode(m_traj.states.back());
            score = m_scorer->similarity(decoded, m_conditions.layout);
            if (!std::isfinite(score)) {
                throw ScorerError("non-finite similarity");
            }
        } catch (const std::exception& e) {
            if (!m_config.scorer_fallback) {
                abort(SamplingAborted::Cause::Scorer, s, std::string("scorer failed: ") + e.what());
            }
            log()->warn("step {}: scorer failed ({}), falling back to graft at t_max={}", s, e.what(),
                        m_window.t_max);
            m_scorer_failed = true;
            detect(s);
            return;
        }
        m_traj.similarity.push(s, score);
        if (update(m_traj.similarity, s, m_policy, m_config.total_steps) == GraftDecision::GraftNow) {
            m_traj.graft_step = s;
        }
    }

    void advance(int s) {
        const State& x = m_traj.states.back();
        const bool grafted = m_traj.graft_step && s >= *m_traj.graft_step;
        const ConditionRole role = grafted ? ConditionRole::Target : ConditionRole::Layout;
        const bool guided = grafted || m_config.apply_guidance_during_layout;
        const Condition& cond = m_conditions.get(role);

        std::array<const Condition*, 3> request{&m_conditions.unconditional, &cond, &m_conditions.negative};
        std::span<const Condition* const> asked =
            guided ? std::span<const Condition* const>(request) : std::span<const Condition* const>(&request[1], 1);

        const double t = m_config.eval_time(s);
        std::vector<Vector> v;
        try {
            v = m_backend.velocities(x, t, asked);
        } catch (const NumericFailure& e) {
            abort(SamplingAborted::Cause::Numeric, s, e.what());
        } catch (const std::exception& e) {
            abort(SamplingAborted::Cause::Backend, s, e.what());
        }
        if (v.size() != asked.size()) {
            abort(SamplingAborted::Cause::Backend, s,
                  "backend returned " + std::to_string(v.size()) + " velocities for " +
                      std::to_string(asked.size()) + " conditions");
        }
        for (const auto& vi : v) {
            if (vi.size() != x.dim()) {
                abort(SamplingAborted::Cause::Backend, s,
                      "backend velocity has dimension " + std::to_string(vi.size()) + ", state has " +
                          std::to_string(x.dim()));
            }
        }

        try {
            const Vector velocity = guided ? guided_velocity(v[0], v[1], v[2], m_config.guidance) : std::move(v[0]);
            State next = euler_step(x, velocity, m_config.step_size());
            m_traj.schedule.push_back(role);
            m_traj.states.push_back(std::move(next));
        } catch (const NumericFailure& e) {
            abort(SamplingAborted::Cause::Numeric, s, e.what());
        }
    }

    const SamplerConfig& m_config;
    const ConditionSet& m_conditions;
    VelocityModel& m_backend;
    SimilarityScorer* m_scorer;
    const GraftPolicy& m_policy;

    Trajectory m_traj;
    WindowBounds m_window{0, 0};
    bool m_scorer_failed = false;
};

}  // namespace

Trajectory sample(const SamplerConfig& config, const ConditionSet& conditions, VelocityModel& backend,
                  SimilarityScorer* scorer, const GraftPolicy& policy) {
    return Run(config, conditions, backend, scorer, policy)();
}

}  // namespace pgraft
