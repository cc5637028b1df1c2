#include "pgraft/detector.hpp"

#include <cmath>
#include <istream>
#include <sstream>
#include <string>

#include "pgraft/errors.hpp"
#include "pgraft/log.hpp"

namespace pgraft {

namespace {

// Absorbs representation error in products such as 0.02 * 100.
constexpr double kRoundingSlack = 1e-9;

}  // namespace

GraftPolicy GraftPolicy::fixed(int step) {
    GraftPolicy p;
    p.mode = Mode::Fixed;
    p.fixed_step = step;
    return p;
}

GraftPolicy GraftPolicy::dynamic() {
    return GraftPolicy{};
}

void GraftPolicy::validate(int total_steps) const {
    if (total_steps < 1) {
        throw ConfigError("sampler.steps", "total steps must be >= 1");
    }
    if (mode == Mode::Fixed) {
        if (fixed_step < 0 || fixed_step > total_steps) {
            throw ConfigError("graft.T", "fixed graft step " + std::to_string(fixed_step) + " outside [0, " +
                                             std::to_string(total_steps) + "]");
        }
        return;
    }
    if (k < 1) {
        throw ConfigError("graft.k", "k must be >= 1");
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw ConfigError("graft.epsilon", "epsilon must be a positive finite number");
    }
    if (!(window_lo >= 0.0 && window_lo < window_hi && window_hi <= 1.0)) {
        throw ConfigError("graft.window", "window must satisfy 0 <= window_lo < window_hi <= 1");
    }
    window_bounds(*this, total_steps);
}

void SimilarityTrace::push(int step, double score) {
    if (!std::isfinite(score)) {
        throw InvalidArgument("non-finite similarity at step " + std::to_string(step));
    }
    if (!m_entries.empty() && step <= m_entries.back().step) {
        throw InvalidArgument("similarity trace steps must strictly increase (" + std::to_string(step) +
                              " after " + std::to_string(m_entries.back().step) + ")");
    }
    m_entries.push_back({step, score});
}

std::optional<double> SimilarityTrace::at(int step) const {
    // Traces are short (at most the window length), linear search is fine.
    for (auto it = m_entries.rbegin(); it != m_entries.rend(); ++it) {
        if (it->step == step) {
            return it->score;
        }
        if (it->step < step) {
            break;
        }
    }
    return std::nullopt;
}

WindowBounds window_bounds(const GraftPolicy& policy, int total_steps) {
    if (total_steps < 1) {
        throw InvalidArgument("total steps must be >= 1");
    }
    const double s = static_cast<double>(total_steps);
    const int t_min = static_cast<int>(std::ceil(policy.window_lo * s - kRoundingSlack));
    const int t_max = static_cast<int>(std::floor(policy.window_hi * s + kRoundingSlack));
    if (t_min > t_max) {
        throw ConfigError("graft.window", "window [" + std::to_string(policy.window_lo) + ", " +
                                                 std::to_string(policy.window_hi) + "] of " +
                                                 std::to_string(total_steps) + " steps rounds to t_min=" +
                                                 std::to_string(t_min) + " > t_max=" + std::to_string(t_max));
    }
    return {t_min, t_max};
}

GraftDecision update(const SimilarityTrace& trace, int step, const GraftPolicy& policy, int total_steps) {
    if (!policy.is_dynamic()) {
        return step >= policy.fixed_step ? GraftDecision::GraftNow : GraftDecision::Continue;
    }
    const auto [t_min, t_max] = window_bounds(policy, total_steps);
    if (step < t_min) {
        return GraftDecision::Continue;
    }
    if (step > t_max) {
        return GraftDecision::GraftNow;
    }

    const auto current = trace.at(step);
    const auto lagged = trace.at(step - policy.k);
    if (current && lagged) {
        if (*current - *lagged <= policy.epsilon) {
            return GraftDecision::GraftNow;
        }
    } else if (step - policy.k >= t_min || !current) {
        log()->warn("graft detector: missing similarity at step {} for lag {}", step, policy.k);
    } else {
        log()->debug("graft detector: no score yet at step {} (lag {})", step - policy.k, policy.k);
    }
    return step == t_max ? GraftDecision::GraftNow : GraftDecision::Continue;
}

int decide_graft_step(const SimilarityTrace& trace, const GraftPolicy& policy, int total_steps) {
    policy.validate(total_steps);
    if (!policy.is_dynamic()) {
        return policy.fixed_step;
    }
    const auto [t_min, t_max] = window_bounds(policy, total_steps);
    for (int step = t_min; step <= t_max; ++step) {
        if (update(trace, step, policy, total_steps) == GraftDecision::GraftNow) {
            return step;
        }
    }
    return t_max;
}

SimilarityTrace read_trace_csv(std::istream& in) {
    SimilarityTrace trace;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw InvalidArgument("trace line " + std::to_string(line_no) + ": expected 'step,score'");
        }
        const std::string step_text = line.substr(0, comma);
        const std::string score_text = line.substr(comma + 1);
        if (line_no == 1 && step_text.find("step") != std::string::npos) {
            continue;
        }
        try {
            std::size_t used_step = 0;
            std::size_t used_score = 0;
            const int step = std::stoi(step_text, &used_step);
            const double score = std::stod(score_text, &used_score);
            if (step_text.find_first_not_of(" \t", used_step) != std::string::npos ||
                score_text.find_first_not_of(" \t", used_score) != std::string::npos) {
                throw std::invalid_argument("trailing characters");
            }
            trace.push(step, score);
        } catch (const std::logic_error&) {
            throw InvalidArgument("trace line " + std::to_string(line_no) + ": cannot parse '" + line + "'");
        }
    }
    return trace;
}

}  // namespace pgraft
