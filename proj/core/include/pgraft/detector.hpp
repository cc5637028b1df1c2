#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

namespace pgraft {

/// When to switch from the layout prompt to the target prompt.
struct GraftPolicy {
    enum class Mode { Fixed, Dynamic };

    Mode mode = Mode::Dynamic;
    int fixed_step = 0;       ///< Fixed mode: steps s < fixed_step use the layout prompt.
    int k = 2;                ///< Dynamic mode: lag of the similarity difference.
    double epsilon = 0.002;   ///< Dynamic mode: plateau tolerance.
    double window_lo = 0.02;  ///< Search window start, fraction of total steps.
    double window_hi = 0.20;  ///< Search window end, fraction of total steps.

    static GraftPolicy fixed(int step);
    static GraftPolicy dynamic();

    /// Throws ConfigError on violated invariants, including an empty rounded window.
    void validate(int total_steps) const;
    bool is_dynamic() const noexcept { return mode == Mode::Dynamic; }
};

struct SimilarityEntry {
    int step;
    double score;
};

/// Layout-prompt similarity recorded against step index; steps strictly increase.
class SimilarityTrace {
public:
    void push(int step, double score);

    std::optional<double> at(int step) const;
    const std::vector<SimilarityEntry>& entries() const noexcept { return m_entries; }
    bool empty() const noexcept { return m_entries.empty(); }
    std::size_t size() const noexcept { return m_entries.size(); }

private:
    std::vector<SimilarityEntry> m_entries;
};

struct WindowBounds {
    int t_min;
    int t_max;
};

/// t_min = ceil(window_lo * S), t_max = floor(window_hi * S).
WindowBounds window_bounds(const GraftPolicy& policy, int total_steps);

enum class GraftDecision { Continue, GraftNow };

/// Plateau rule evaluated at `step`: graft at the first in-window step with
/// S(step) - S(step - k) <= epsilon, or at t_max when no plateau occurred.
GraftDecision update(const SimilarityTrace& trace, int step, const GraftPolicy& policy, int total_steps);

/// Offline replay of `update` over a complete trace; returns the decided graft step.
int decide_graft_step(const SimilarityTrace& trace, const GraftPolicy& policy, int total_steps);

/// Reads `step,score` rows; a leading header line and blank lines are skipped.
SimilarityTrace read_trace_csv(std::istream& in);

}  // namespace pgraft
