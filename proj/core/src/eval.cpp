#include "pgraft/eval.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "pgraft/errors.hpp"

namespace pgraft {

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("sample of dimension " + std::to_string(a.size()) + " against centroid of dimension " +
                              std::to_string(b.size()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return std::sqrt(acc);
}

void check_centroids(std::span<const Vector> centroids, double r) {
    if (centroids.empty()) {
        throw InvalidArgument("centroid list is empty");
    }
    if (!(r > 0.0)) {
        throw InvalidArgument("radius must be positive");
    }
    for (std::size_t i = 0; i < centroids.size(); ++i) {
        for (std::size_t j = i + 1; j < centroids.size(); ++j) {
            if (centroids[i] == centroids[j]) {
                throw InvalidArgument("centroids " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
            }
        }
    }
}

}  // namespace

std::vector<std::size_t> assign_regions(std::span<const Vector> samples, std::span<const Vector> centroids, double r) {
    check_centroids(centroids, r);
    std::vector<std::size_t> out(samples.size(), kUnassigned);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double best = r;
        for (std::size_t j = 0; j < centroids.size(); ++j) {
            const double d = distance(samples[i], centroids[j]);
            if (d < best || (d == best && out[i] == kUnassigned)) {
                best = d;
                out[i] = j;
            }
        }
    }
    return out;
}

RunBatch RunBatch::from_trajectories(std::string label, std::span<const Trajectory> trajectories) {
    RunBatch batch{std::move(label), {}, {}};
    for (const auto& t : trajectories) {
        batch.samples.push_back(t.terminal().data);
        if (t.graft_step) {
            batch.graft_steps.push_back(*t.graft_step);
        }
    }
    return batch;
}

EvalReport compare_runs(std::span<const RunBatch> runs, std::span<const Vector> centroids, double r) {
    check_centroids(centroids, r);
    EvalReport report;
    report.regions = centroids.size();
    report.radius = r;
    for (const auto& run : runs) {
        EvalRow row;
        row.label = run.label;
        row.n = run.samples.size();
        if (row.n > 0) {
            const auto assigned = assign_regions(run.samples, centroids, r);
            std::vector<std::size_t> counts(centroids.size(), 0);
            for (auto a : assigned) {
                if (a != kUnassigned) {
                    ++counts[a];
                }
            }
            std::size_t separated = 0;
            for (const auto& x : run.samples) {
                const auto near = std::count_if(centroids.begin(), centroids.end(),
                                                [&](const Vector& c) { return distance(x, c) <= r; });
                separated += near == 1;
            }
            const auto n = static_cast<double>(row.n);
            std::vector<double> occupancy;
            std::size_t occupied = 0;
            for (auto c : counts) {
                occupancy.push_back(static_cast<double>(c) / n);
                occupied += c > 0;
            }
            row.occupancy = std::move(occupancy);
            row.existence = static_cast<double>(occupied) / static_cast<double>(centroids.size());
            row.separation = static_cast<double>(separated) / n;
        }
        if (!run.graft_steps.empty()) {
            long long sum = 0;
            for (int g : run.graft_steps) {
                sum += g;
            }
            row.graft_mean = static_cast<double>(sum) / static_cast<double>(run.graft_steps.size());
            row.graft_min = *std::min_element(run.graft_steps.begin(), run.graft_steps.end());
            row.graft_max = *std::max_element(run.graft_steps.begin(), run.graft_steps.end());
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::vector<std::string> EvalReport::columns() const {
    std::vector<std::string> cols{"label", "n"};
    for (std::size_t i = 1; i <= regions; ++i) {
        cols.push_back("occupancy_" + std::to_string(i));
    }
    for (const char* c : {"existence", "separation", "graft_mean", "graft_min", "graft_max"}) {
        cols.emplace_back(c);
    }
    return cols;
}

namespace {

template <class T>
std::string cell(const std::optional<T>& v) {
    return v ? fmt::format("{}", *v) : std::string();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return out + "\"";
}

}  // namespace

std::string EvalReport::to_csv() const {
    const auto cols = columns();
    std::string out;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out += (i ? "," : "") + cols[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        out += csv_field(row.label) + "," + std::to_string(row.n);
        for (std::size_t i = 0; i < regions; ++i) {
            out += ",";
            if (row.occupancy) {
                out += fmt::format("{}", (*row.occupancy)[i]);
            }
        }
        out += "," + cell(row.existence) + "," + cell(row.separation) + "," + cell(row.graft_mean) + "," +
               cell(row.graft_min) + "," + cell(row.graft_max) + "\n";
    }
    return out;
}

std::string EvalReport::to_json() const {
    using Json = nlohmann::ordered_json;
    auto opt = [](const auto& v) { return v ? Json(*v) : Json(nullptr); };
    Json doc;
    doc["regions"] = regions;
    doc["radius"] = radius;
    doc["columns"] = columns();
    doc["rows"] = Json::array();
    for (const auto& row : rows) {
        Json r;
        r["label"] = row.label;
        r["n"] = row.n;
        r["occupancy"] = opt(row.occupancy);
        r["existence"] = opt(row.existence);
        r["separation"] = opt(row.separation);
        r["graft_mean"] = opt(row.graft_mean);
        r["graft_min"] = opt(row.graft_min);
        r["graft_max"] = opt(row.graft_max);
        doc["rows"].push_back(std::move(r));
    }
    return doc.dump(2) + "\n";
}

std::vector<std::pair<std::string, GraftPolicy>> ablation_grid() {
    return {
        {"SC-only", GraftPolicy::fixed(0)},         {"PG-fixed-3", GraftPolicy::fixed(3)},
        {"PG-fixed-5", GraftPolicy::fixed(5)},      {"PG-fixed-7", GraftPolicy::fixed(7)},
        {"PG-fixed-10", GraftPolicy::fixed(10)},    {"PG-dynamic", GraftPolicy::dynamic()},
    };
}

}  // namespace pgraft
