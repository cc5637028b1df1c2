#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pgraft/detector.hpp"
#include "pgraft/errors.hpp"
#include "pgraft/mixture.hpp"

namespace pgraft {

struct State {
    Vector data;
    int step = 0;

    std::size_t dim() const noexcept { return data.size(); }
};

struct SamplerConfig {
    int total_steps = 100;
    double guidance = 12.0;
    std::size_t dim = 2;
    std::uint64_t seed = 0;
    bool apply_guidance_during_layout = true;
    /// On scorer failure in dynamic mode, fall back to grafting at t_max instead of aborting.
    bool scorer_fallback = false;

    double step_size() const noexcept { return 1.0 / static_cast<double>(total_steps); }
    /// Velocity evaluation time for step s: (s + 1/2) / S, so t stays below 1.
    double eval_time(int step) const noexcept { return (static_cast<double>(step) + 0.5) * step_size(); }

    void validate() const;
};

/// One conditioning signal. Remote backends read `text`; the analytic backend reads `mixture`.
struct Condition {
    std::string id;
    std::string text;
    std::optional<MixtureSpec> mixture;
};

enum class ConditionRole { Unconditional, Layout, Target, Negative };

const char* to_string(ConditionRole role) noexcept;

struct ConditionSet {
    Condition unconditional;
    Condition layout;
    Condition target;
    Condition negative;
    std::string bundle_id;

    const Condition& get(ConditionRole role) const noexcept;
};

/// Velocity model f(x, t; c). Implementations return one vector per requested
/// condition, in request order, each of the state's dimension.
class VelocityModel {
public:
    virtual ~VelocityModel() = default;

    virtual std::vector<Vector> velocities(const State& state, double t,
                                           std::span<const Condition* const> conditions) = 0;

    /// True if velocities() may be called from several threads at once.
    virtual bool concurrent_safe() const { return false; }
};

/// Prompt similarity of a decoded state.
class SimilarityScorer {
public:
    virtual ~SimilarityScorer() = default;

    virtual Vector decode(const State& state) { return state.data; }
    virtual double similarity(std::span<const double> decoded, const Condition& prompt) = 0;
    virtual bool concurrent_safe() const { return false; }
};

struct Trajectory {
    std::vector<State> states;     ///< S+1 states on success; states[0] is the noise draw.
    SimilarityTrace similarity;
    std::optional<int> graft_step;
    std::vector<ConditionRole> schedule;  ///< Conditional used at each executed step.
    SamplerConfig config;
    std::string bundle_id;

    const State& terminal() const { return states.back(); }
};

/// Sampling stopped early; `partial()` holds every state produced so far.
class SamplingAborted : public Error {
public:
    enum class Cause { Backend, Scorer, Numeric };

    SamplingAborted(Cause cause, int step, const std::string& message, Trajectory partial)
        : Error("sampling aborted at step " + std::to_string(step) + ": " + message),
          m_cause(cause), m_step(step), m_partial(std::move(partial)) {}

    Cause cause() const noexcept { return m_cause; }
    int step() const noexcept { return m_step; }
    const Trajectory& partial() const noexcept { return m_partial; }

private:
    Cause m_cause;
    int m_step;
    Trajectory m_partial;
};

State init_state(const SamplerConfig& config);

/// v_uncond + omega (v_cond - v_neg), elementwise.
Vector guided_velocity(std::span<const double> v_uncond, std::span<const double> v_cond,
                       std::span<const double> v_neg, double omega);

/// x + gamma v with the step counter advanced. Throws NumericFailure on non-finite input.
State euler_step(const State& x, std::span<const double> velocity, double gamma);

/// Integrates the guided flow from init_state(config), conditioning on c_layout for
/// steps before the graft step and on c_target from it onward. `scorer` may be null
/// for fixed policies.
Trajectory sample(const SamplerConfig& config, const ConditionSet& conditions, VelocityModel& backend,
                  SimilarityScorer* scorer, const GraftPolicy& policy);

}  // namespace pgraft
