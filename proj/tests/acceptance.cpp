// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <pgraft/analytic.hpp>
#include <pgraft/batch.hpp>
#include <pgraft/eval.hpp>
#include <pgraft/log.hpp>
#include <pgraft/remote.hpp>
#include <pgraft/stub_server.hpp>
#include <pgraft/trajectory_io.hpp>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace pgraft;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

struct Criterion {
    const char* name;
    double budget_s;  // 0: no runtime limit
    std::function<Outcome()> check;
};

Outcome convergence() {
    const Vector mu{1.0, -0.5};
    const double sigma = 0.5;
    const auto set = fixture::pure(fixture::single(mu, sigma));
    AnalyticBackend backend;
    const std::uint64_t seeds = 8;
    auto terminals = [&](int S) {
        SamplerConfig c;
        c.total_steps = S;
        return sample_batch(c, set, backend, nullptr, GraftPolicy::fixed(0), seeds);
    };
    const auto reference = terminals(40000);
    const std::vector<int> grid{50, 100, 200, 400};
    std::vector<double> lx, ly;
    std::string errs;
    for (int S : grid) {
        const auto runs = terminals(S);
        double err = 0;
        for (std::size_t i = 0; i < seeds; ++i) {
            const auto& a = runs[i].terminal().data;
            const auto& b = reference[i].terminal().data;
            err += std::hypot(a[0] - b[0], a[1] - b[1]) / seeds;
        }
        lx.push_back(std::log(1.0 / S));
        ly.push_back(std::log(err));
        errs += fmt::format(" S={}:{:.3g}", S, err);
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i] / lx.size();
        my += ly[i] / ly.size();
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double slope = sxy / sxx;
    return {std::abs(slope - 1.0) <= 0.2, fmt::format("slope {:.4f} (need 1.0 +- 0.2);{}", slope, errs)};
}

Outcome distribution() {
    MixtureSpec spec;
    spec.dim = 2;
    spec.components = {{{-3.0, 0.0}, 0.5, 0.5}, {{3.0, 0.0}, 0.5, 0.3}, {{0.0, 3.0}, 0.5, 0.2}};
    const auto set = fixture::pure(spec);
    AnalyticBackend backend;
    SamplerConfig c;
    c.total_steps = 500;
    const std::size_t n = 5000;
    const auto runs = sample_batch(c, set, backend, nullptr, GraftPolicy::fixed(0), n, 8);
    std::vector<double> occupancy(3, 0.0);
    double mean[2] = {0, 0};
    for (const auto& t : runs) {
        const auto& x = t.terminal().data;
        std::size_t best = 0;
        double best_d = INFINITY;
        for (std::size_t j = 0; j < 3; ++j) {
            const auto& m = spec.components[j].mean;
            const double d = std::hypot(x[0] - m[0], x[1] - m[1]);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        occupancy[best] += 1.0 / n;
        mean[0] += x[0] / n;
        mean[1] += x[1] / n;
    }
    const double true_mean[2] = {-0.6, 0.6};
    bool ok = true;
    for (std::size_t j = 0; j < 3; ++j) {
        ok = ok && std::abs(occupancy[j] - spec.components[j].weight) <= 0.03;
    }
    ok = ok && std::abs(mean[0] - true_mean[0]) <= 0.05 && std::abs(mean[1] - true_mean[1]) <= 0.05;
    return {ok, fmt::format("occupancy {:.4f}/{:.4f}/{:.4f} vs 0.5/0.3/0.2 (+-0.03); mean ({:.4f}, {:.4f}) vs "
                            "(-0.6, 0.6) (+-0.05)",
                            occupancy[0], occupancy[1], occupancy[2], mean[0], mean[1])};
}

Outcome separation() {
    const SceneSpec scene = SceneSpec::defaults();
    const auto set = fixture::two_region_conditions(scene);
    const auto centroids = region_centroids(fixture::two_items(), scene);
    AnalyticBackend backend;
    AnalyticScorer scorer(scene.tau);
    SamplerConfig c;
    const std::size_t n = 1000;
    const auto grafted = sample_batch(c, set, backend, &scorer, GraftPolicy::dynamic(), n, 8);
    const auto target_only = sample_batch(c, set, backend, &scorer, GraftPolicy::fixed(0), n, 8);
    const std::vector<RunBatch> runs{RunBatch::from_trajectories("SC-only", target_only),
                                     RunBatch::from_trajectories("PG-dynamic", grafted)};
    const auto report = compare_runs(runs, centroids, scene.effective_radius());
    const auto& sc = report.rows[0];
    const auto& pg = report.rows[1];
    const auto& occ = *pg.occupancy;
    const bool ok = occ.size() == 2 && occ[0] >= 0.40 && occ[1] >= 0.40 && *pg.separation >= 0.95 &&
                    *sc.separation < *pg.separation;
    return {ok, fmt::format("grafted occupancy {:.3f}/{:.3f} (>= 0.40), separation {:.3f} (>= 0.95); "
                            "target-only separation {:.3f}",
                            occ[0], occ[1], *pg.separation, *sc.separation)};
}

Outcome detector() {
    std::vector<std::string> failures;
    auto expect = [&](bool cond, const std::string& what) {
        if (!cond) {
            failures.push_back(what);
        }
    };
    const auto p = GraftPolicy::dynamic();
    SimilarityTrace worked;
    for (auto [s, v] : {std::pair{3, 0.50}, {4, 0.52}, {5, 0.521}, {6, 0.5212}}) {
        worked.push(s, v);
    }
    expect(update(worked, 5, p, 100) == GraftDecision::Continue && decide_graft_step(worked, p, 100) == 6,
           "worked sequence");

    SimilarityTrace flat;
    for (int s = 0; s <= 20; ++s) {
        flat.push(s, 0.5);
    }
    expect(update(flat, 0, p, 100) == GraftDecision::Continue && update(flat, 1, p, 100) == GraftDecision::Continue &&
               decide_graft_step(flat, p, 100) == 2,
           "no trigger before t_min");

    SimilarityTrace rising;
    for (int s = 0; s <= 20; ++s) {
        rising.push(s, 0.01 * s);
    }
    expect(decide_graft_step(rising, p, 100) == 20 && decide_graft_step(SimilarityTrace{}, p, 100) == 20,
           "fallback at t_max");
    for (int T : {0, 4, 9, 100}) {
        expect(decide_graft_step(flat, GraftPolicy::fixed(T), 100) == T &&
                   decide_graft_step(rising, GraftPolicy::fixed(T), 100) == T,
               fmt::format("Fixed({}) ignores traces", T));
    }

    std::mt19937_64 rng(99);
    int compared = 0;
    while (compared < 1000) {
        const int S = std::uniform_int_distribution<int>(10, 200)(rng);
        GraftPolicy q = GraftPolicy::dynamic();
        q.k = std::uniform_int_distribution<int>(1, 4)(rng);
        q.epsilon = std::uniform_real_distribution<double>(1e-4, 1e-2)(rng);
        q.window_lo = std::uniform_real_distribution<double>(0.0, 0.3)(rng);
        q.window_hi = std::uniform_real_distribution<double>(q.window_lo + 0.05, 1.0)(rng);
        const auto w = window_bounds(q, S);
        if (w.t_min > w.t_max) {
            continue;
        }
        std::bernoulli_distribution present(0.85);
        std::normal_distribution<double> gain(q.epsilon, 2 * q.epsilon);
        std::vector<std::pair<int, double>> raw;
        SimilarityTrace trace;
        double score = 0.3;
        for (int s = 0; s <= S; ++s) {
            score += gain(rng);
            if (present(rng)) {
                raw.emplace_back(s, score);
                trace.push(s, score);
            }
        }
        if (decide_graft_step(trace, q, S) !=
            oracle::brute_force_graft(raw, S, q.k, q.epsilon, q.window_lo, q.window_hi)) {
            failures.push_back(fmt::format("random trace {}", compared));
        }
        ++compared;
    }
    std::string detail = fmt::format("4 unit cases + {} random traces vs brute-force scan", compared);
    for (const auto& f : failures) {
        detail += "; failed: " + f;
    }
    return {failures.empty(), detail};
}

Outcome guidance() {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> w(0.0, 20.0);
    double worst = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t d = 1 + trial % 8;
        Vector u(d), c(d), g(d);
        for (std::size_t i = 0; i < d; ++i) {
            u[i] = n(rng);
            c[i] = n(rng);
            g[i] = n(rng);
        }
        const double w1 = w(rng), w2 = w(rng);
        const auto zero = guided_velocity(u, c, g, 0.0);
        const auto same = guided_velocity(u, c, c, w1);
        const auto a = guided_velocity(u, c, g, w1);
        const auto b = guided_velocity(u, c, g, w2);
        const auto ab = guided_velocity(u, c, g, w1 + w2);
        for (std::size_t i = 0; i < d; ++i) {
            worst = std::max({worst, std::abs(zero[i] - u[i]), std::abs(same[i] - u[i]),
                              std::abs(ab[i] - (a[i] + b[i] - u[i]))});
        }
    }

    // The same identity through the engine: c_target = c_neg reproduces unconditional sampling.
    const SceneSpec scene = SceneSpec::defaults();
    auto set = fixture::two_region_conditions(scene);
    set.target.mixture = set.negative.mixture;
    ConditionSet uncond = fixture::pure(*set.unconditional.mixture);
    AnalyticBackend backend;
    SamplerConfig c;
    c.seed = 11;
    c.apply_guidance_during_layout = false;
    const auto guided = sample(c, set, backend, nullptr, GraftPolicy::fixed(0));
    c.guidance = 0.0;
    const auto plain = sample(c, uncond, backend, nullptr, GraftPolicy::fixed(0));
    double engine = 0;
    for (std::size_t s = 0; s < guided.states.size(); ++s) {
        for (std::size_t i = 0; i < 2; ++i) {
            engine = std::max(engine, std::abs(guided.states[s].data[i] - plain.states[s].data[i]));
        }
    }
    return {worst <= 1e-12 && engine <= 1e-12,
            fmt::format("max identity residual {:.3g} over 1e4 draws, engine residual {:.3g} (<= 1e-12)", worst,
                        engine)};
}

Outcome schedule() {
    const SceneSpec scene = SceneSpec::defaults();
    const auto set = fixture::two_region_conditions(scene);
    AnalyticBackend inner;
    AnalyticScorer scorer(scene.tau);
    std::mt19937_64 rng(2718);
    int configs = 0, bad = 0;
    while (configs < 100) {
        SamplerConfig c;
        c.total_steps = std::uniform_int_distribution<int>(10, 150)(rng);
        c.guidance = std::uniform_real_distribution<double>(0.0, 15.0)(rng);
        c.seed = rng();
        c.apply_guidance_during_layout = rng() % 4 != 0;
        const GraftPolicy policy =
            rng() % 2 ? GraftPolicy::dynamic()
                      : GraftPolicy::fixed(std::uniform_int_distribution<int>(0, c.total_steps)(rng));
        fixture::RecordingBackend backend(inner);
        const auto t = sample(c, set, backend, &scorer, policy);
        ++configs;
        const int g = t.graft_step.value_or(-1);
        bool ok = g >= 0 && backend.calls.size() == static_cast<std::size_t>(c.total_steps);
        for (std::size_t s = 0; ok && s < backend.calls.size(); ++s) {
            const auto& ids = backend.calls[s].ids;
            const std::string expected = static_cast<int>(s) < g ? "layout" : "target";
            const std::string used = ids.size() == 1 ? ids[0] : ids.size() == 3 ? ids[1] : "";
            ok = used == expected;
        }
        bad += ok ? 0 : 1;
    }
    return {bad == 0, fmt::format("{} configs, {} with a call log disagreeing with the graft step", configs, bad)};
}

std::string files_of(const std::vector<Trajectory>& runs) {
    std::ostringstream out;
    for (const auto& t : runs) {
        write_trajectory_jsonl(out, t);
        write_states_f32(out, t);
    }
    return out.str();
}

Outcome determinism() {
    const SceneSpec scene = SceneSpec::defaults();
    const auto set = fixture::two_region_conditions(scene);
    AnalyticBackend backend;
    AnalyticScorer scorer(scene.tau);
    SamplerConfig c;
    c.seed = 42;
    const auto a = files_of(sample_batch(c, set, backend, &scorer, GraftPolicy::dynamic(), 16, 1));
    const auto b = files_of(sample_batch(c, set, backend, &scorer, GraftPolicy::dynamic(), 16, 4));
    c.seed = 43;
    const auto other = files_of(sample_batch(c, set, backend, &scorer, GraftPolicy::dynamic(), 16, 1));
    return {a == b && a != other,
            fmt::format("{} bytes of trajectory files, identical across runs: {}", a.size(), a == b ? "yes" : "no")};
}

Outcome cross_wire() {
    const SceneSpec scene = SceneSpec::defaults();
    const auto set = fixture::two_region_conditions(scene);
    StubOptions options;
    options.tau = scene.tau;
    for (const Condition* c : {&set.unconditional, &set.layout, &set.target, &set.negative}) {
        options.mixtures.emplace(c->text, *c->mixture);
    }
    StubServer server(options);
    RemoteConfig rc;
    rc.endpoint = server.endpoint();
    RemoteClient client(rc);
    RemoteBackend remote(client);
    RemoteScorer remote_scorer(client, remote.concurrent_safe());
    AnalyticBackend local;
    AnalyticScorer local_scorer(scene.tau);
    SamplerConfig c;
    const std::size_t n = 32;
    double worst = 0;
    std::size_t graft_mismatch = 0;
    for (const auto& policy : {GraftPolicy::fixed(8), GraftPolicy::dynamic()}) {
        const auto a = sample_batch(c, set, local, &local_scorer, policy, n, 4);
        const auto b = sample_batch(c, set, remote, &remote_scorer, policy, n, 4);
        for (std::size_t i = 0; i < n; ++i) {
            graft_mismatch += a[i].graft_step != b[i].graft_step;
            for (std::size_t s = 0; s < a[i].states.size(); ++s) {
                for (std::size_t d = 0; d < 2; ++d) {
                    worst = std::max(worst, std::abs(a[i].states[s].data[d] - b[i].states[s].data[d]));
                }
            }
        }
    }
    return {worst <= 1e-6 && graft_mismatch == 0,
            fmt::format("max per-coordinate deviation {:.3g} over {} trajectories (<= 1e-6), graft-step mismatches {}",
                        worst, 2 * n, graft_mismatch)};
}

Outcome ablation() {
    const SceneSpec scene = SceneSpec::defaults();
    const auto set = fixture::two_region_conditions(scene);
    const auto centroids = region_centroids(fixture::two_items(), scene);
    AnalyticBackend backend;
    AnalyticScorer scorer(scene.tau);
    SamplerConfig c;
    std::vector<RunBatch> runs;
    for (const auto& [label, policy] : ablation_grid()) {
        runs.push_back(RunBatch::from_trajectories(label, sample_batch(c, set, backend, &scorer, policy, 50, 8)));
    }
    const auto report = compare_runs(runs, centroids, scene.effective_radius());
    const std::vector<std::string> labels{"SC-only", "PG-fixed-3", "PG-fixed-5", "PG-fixed-7", "PG-fixed-10",
                                          "PG-dynamic"};
    const std::vector<std::string> columns{"label",      "n",          "occupancy_1", "occupancy_2", "existence",
                                           "separation", "graft_mean", "graft_min",   "graft_max"};
    bool ok = report.rows.size() == 6 && report.columns() == columns;
    const auto csv = report.to_csv();
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::string header;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        header += (i ? "," : "") + columns[i];
    }
    ok = ok && line == header;
    for (std::size_t i = 0; ok && i < labels.size(); ++i) {
        ok = report.rows[i].label == labels[i] && std::getline(in, line) && line.rfind(labels[i] + ",", 0) == 0;
    }
    const auto doc = nlohmann::json::parse(report.to_json());
    ok = ok && doc["rows"].size() == 6 && doc["columns"] == columns;
    return {ok, fmt::format("{} rows, header '{}'", report.rows.size(), header)};
}

}  // namespace

int main() {
    log()->set_level(spdlog::level::err);
    const std::vector<Criterion> criteria{
        {"integrator convergence", 10, convergence},
        {"distributional correctness", 60, distribution},
        {"grafting separation", 60, separation},
        {"plateau detector", 5, detector},
        {"guidance identities", 0, guidance},
        {"schedule correctness", 0, schedule},
        {"determinism", 0, determinism},
        {"cross-wire equivalence", 0, cross_wire},
        {"ablation report schema", 0, ablation},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string timing = fmt::format("{:.2f}s", elapsed);
        if (c.budget_s > 0) {
            timing += fmt::format(" of {:.0f}s", c.budget_s);
            if (elapsed >= c.budget_s) {
                o.pass = false;
            }
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << " [" << timing << "]" << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
