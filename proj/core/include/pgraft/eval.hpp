#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pgraft/detector.hpp"
#include "pgraft/sampler.hpp"

namespace pgraft {

inline constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();

/// Nearest centroid within distance r (inclusive), lowest index on ties, else kUnassigned.
std::vector<std::size_t> assign_regions(std::span<const Vector> samples, std::span<const Vector> centroids, double r);

/// Terminal samples and graft steps of one method.
struct RunBatch {
    std::string label;
    std::vector<Vector> samples;
    std::vector<int> graft_steps;

    static RunBatch from_trajectories(std::string label, std::span<const Trajectory> trajectories);
};

struct EvalRow {
    std::string label;
    std::size_t n = 0;
    // Null when n == 0.
    std::optional<std::vector<double>> occupancy;
    std::optional<double> existence;
    std::optional<double> separation;
    // Null when no sample recorded a graft step.
    std::optional<double> graft_mean;
    std::optional<int> graft_min;
    std::optional<int> graft_max;
};

struct EvalReport {
    std::size_t regions = 0;
    double radius = 0.0;
    std::vector<EvalRow> rows;

    /// label,n,occupancy_1..k,existence,separation,graft_mean,graft_min,graft_max; nulls are empty cells.
    std::string to_csv() const;
    /// {"regions", "radius", "columns", "rows": [...]} with the CSV's numbers.
    std::string to_json() const;
    std::vector<std::string> columns() const;
};

/// separation counts samples within r of exactly one centroid.
EvalReport compare_runs(std::span<const RunBatch> runs, std::span<const Vector> centroids, double r);

/// SC-only, PG-fixed-3/5/7/10, PG-dynamic.
std::vector<std::pair<std::string, GraftPolicy>> ablation_grid();

}  // namespace pgraft
