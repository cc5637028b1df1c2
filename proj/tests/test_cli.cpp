#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "app/cli.hpp"

namespace fs = std::filesystem;
using pgraft::app::run_cli;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        files[e.path().filename().string()] = slurp(e.path());
    }
    return files;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        m_dir = fs::temp_directory_path() / ("pgraft_cli_" + std::string(info->name()));
        fs::remove_all(m_dir);
        fs::create_directories(m_dir);
    }
    void TearDown() override { fs::remove_all(m_dir); }

    fs::path dir(const std::string& name) const { return m_dir / name; }

    fs::path m_dir;
};

}  // namespace

TEST(CliHelp, EveryFlagIsDocumented) {
    const std::string readme = slurp(PGRAFT_README);
    ASSERT_FALSE(readme.empty());
    const std::regex flag(R"((--[A-Za-z][A-Za-z0-9_.\-]*))");
    std::size_t checked = 0;
    for (const std::string sub : {"compile", "sample", "detect", "eval", "demo-separation", "serve-stub"}) {
        EXPECT_NE(readme.find("pgraft " + sub), std::string::npos) << sub;
        const auto r = run({sub, "--help"});
        ASSERT_EQ(r.code, 0) << sub;
        std::set<std::string> flags;
        for (std::sregex_iterator it(r.out.begin(), r.out.end(), flag), end; it != end; ++it) {
            flags.insert((*it)[1]);
        }
        ASSERT_FALSE(flags.empty()) << sub;
        for (const auto& f : flags) {
            if (f == "--help") {
                continue;
            }
            EXPECT_NE(readme.find("`" + f + "`"), std::string::npos) << sub << " " << f;
            ++checked;
        }
    }
    EXPECT_GT(checked, 30u);
}

TEST(CliHelp, TopLevel) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    for (const char* sub : {"compile", "sample", "detect", "eval", "demo-separation", "serve-stub"}) {
        EXPECT_NE(r.out.find(sub), std::string::npos);
    }
}

TEST(CliCompile, PrintsBundle) {
    const auto r = run({"compile", "--items", "rice,potato salad"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_EQ(doc["target"], "A photo of rice on the left and potato salad on the right");
    EXPECT_EQ(doc["layout"], "A photo of a plate on the left and a plate on the right");
    EXPECT_EQ(doc["negative"], "Empty plate");
    EXPECT_EQ(run({"compile"}).code, 1);
    EXPECT_EQ(run({"compile", "--items", ""}).code, 2);
}

TEST_F(Cli, SampleIsDeterministic) {
    const std::vector<std::string> args{"sample", "--config", PGRAFT_DEMO_CONFIG, "--out", dir("a").string()};
    const auto first = run(args);
    ASSERT_EQ(first.code, 0) << first.err;
    const auto files = snapshot(dir("a"));
    for (const char* name : {"config.json", "summary.json", "trajectory_0000.jsonl", "trajectory_0003.jsonl",
                             "trace_0000.csv", "states_0000.f32"}) {
        EXPECT_TRUE(files.count(name)) << name;
    }
    const auto second = run(args);
    ASSERT_EQ(second.code, 0);
    EXPECT_EQ(first.out, second.out);
    EXPECT_EQ(snapshot(dir("a")), files);

    const auto states = files.at("states_0000.f32");
    EXPECT_EQ(states.size(), 101u * 2u * 4u);
    const auto summary = nlohmann::json::parse(files.at("summary.json"));
    ASSERT_EQ(summary["samples"].size(), 4u);
    EXPECT_EQ(summary["samples"][2]["seed"], 9);
}

TEST_F(Cli, FixedGraftStepIsReported) {
    const auto r = run({"sample", "--graft.mode", "fixed", "--graft.T", "5", "--seed", "3", "--out",
                        dir("f").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto summary = nlohmann::json::parse(r.out);
    EXPECT_EQ(summary["samples"][0]["graft_step"], 5);
    EXPECT_EQ(summary["samples"][0]["seed"], 3);
    EXPECT_TRUE(summary["samples"][0]["similarity_trace"].is_null());

    std::ifstream traj(dir("f") / "trajectory_0000.jsonl");
    std::string line;
    int n = 0;
    while (std::getline(traj, line)) {
        const auto rec = nlohmann::json::parse(line);
        EXPECT_EQ(rec["step"], n);
        if (n < 5) {
            EXPECT_EQ(rec["condition"], "layout");
        } else if (n < 100) {
            EXPECT_EQ(rec["condition"], "target");
        } else {
            EXPECT_TRUE(rec["condition"].is_null());
        }
        ++n;
    }
    EXPECT_EQ(n, 101);
}

TEST_F(Cli, DumpedConfigReproducesRun) {
    ASSERT_EQ(run({"sample", "--config", PGRAFT_DEMO_CONFIG, "--scene.tau", "5", "--out", dir("a").string()}).code, 0);
    ASSERT_EQ(run({"sample", "--config", (dir("a") / "config.json").string(), "--out", dir("b").string()}).code, 0);
    auto a = snapshot(dir("a"));
    auto b = snapshot(dir("b"));
    a.erase("config.json");
    b.erase("config.json");
    EXPECT_EQ(a, b);
    const auto dumped = nlohmann::json::parse(slurp(dir("a") / "config.json"));
    EXPECT_EQ(dumped["scene"]["tau"], 5.0);
    EXPECT_TRUE(dumped["scene"]["centroids"].is_object());
}

TEST_F(Cli, UnknownKeys) {
    const auto bad = dir("bad.json");
    std::ofstream(bad) << R"({"sampler": {"stepz": 10}})";
    const auto r = run({"sample", "--config", bad.string(), "--out", dir("o").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("sampler.stepz"), std::string::npos) << r.err;
    EXPECT_EQ(run({"sample", "--sampler.stepz", "10"}).code, 1);
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"sample", "--sampler.steps", "0", "--out", dir("o").string()}).code, 2);
    EXPECT_EQ(run({"sample", "--graft.window", "[0.5, 0.1]", "--out", dir("o").string()}).code, 2);
    EXPECT_EQ(run({"sample", "--sampler.dim", "3", "--out", dir("o").string()}).code, 2);
    EXPECT_EQ(run({"sample", "--backend.kind", "remote", "--backend.endpoint", "http://127.0.0.1:1",
                   "--backend.retries", "0", "--backend.timeout_s", "1", "--out", dir("o").string()})
                  .code,
              3);
    EXPECT_EQ(run({"sample", "--sampler.guidance", "1e308", "--out", dir("n").string()}).code, 4);
    EXPECT_TRUE(fs::exists(dir("n") / "partial.jsonl"));
    std::ofstream(dir("file")) << "x";
    EXPECT_EQ(run({"sample", "--out", (dir("file") / "sub").string()}).code, 5);
    EXPECT_EQ(run({"detect", "--trace", dir("missing.csv").string()}).code, 5);
}

TEST_F(Cli, DetectReplaysTrace) {
    const auto csv = dir("trace.csv");
    std::ofstream f(csv);
    f << "step,score\n";
    const double scores[] = {0.10, 0.20, 0.30, 0.40, 0.45, 0.47, 0.471, 0.4715, 0.472};
    for (int s = 2; s < 11; ++s) {
        f << s << "," << scores[s - 2] << "\n";
    }
    f.close();
    const auto r = run({"detect", "--trace", csv.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "9\n");
    EXPECT_EQ(run({"detect", "--trace", csv.string(), "--epsilon", "0.1"}).out, "7\n");
    EXPECT_EQ(run({"detect", "--trace", csv.string(), "--window-hi", "0.05"}).out, "5\n");
}

TEST_F(Cli, DemoSeparationRows) {
    const auto r = run({"demo-separation", "--batch.samples", "40", "--out", dir("d").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    std::string header, first, second;
    std::getline(in, header);
    std::getline(in, first);
    std::getline(in, second);
    EXPECT_EQ(header.rfind("label,", 0), 0u);
    EXPECT_EQ(first.rfind("SC-only,40,", 0), 0u) << first;
    EXPECT_EQ(second.rfind("PG-dynamic,40,", 0), 0u) << second;
    EXPECT_EQ(slurp(dir("d") / "report.csv"), r.out);
    EXPECT_TRUE(fs::exists(dir("d") / "report.json"));
}

TEST_F(Cli, EvalIndependentOfWorkers) {
    const auto one = run({"eval", "--batch.samples", "16", "--batch.workers", "1", "--out", dir("a").string()});
    const auto four = run({"eval", "--batch.samples", "16", "--batch.workers", "4", "--out", dir("b").string()});
    ASSERT_EQ(one.code, 0) << one.err;
    EXPECT_EQ(one.out, four.out);
    std::istringstream in(one.out);
    std::vector<std::string> labels;
    for (std::string line; std::getline(in, line);) {
        labels.push_back(line.substr(0, line.find(',')));
    }
    EXPECT_EQ(labels, (std::vector<std::string>{"label", "SC-only", "PG-fixed-3", "PG-fixed-5", "PG-fixed-7",
                                                "PG-fixed-10", "PG-dynamic"}));
}
