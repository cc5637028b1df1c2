#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <pgraft/batch.hpp>
#include <pgraft/errors.hpp>
#include <pgraft/eval.hpp>
#include <pgraft/trajectory_io.hpp>

#include "run_config.hpp"
#include "scenario.hpp"

namespace pgraft::app {

namespace fs = std::filesystem;

namespace {

class IoError : public Error {
public:
    using Error::Error;
};

const std::map<std::string, const char*> kKeyHelp = {
    {"sampler.steps", "Number of Euler steps S"},
    {"sampler.guidance", "Guidance scale omega"},
    {"sampler.dim", "State dimension (2 for analytic scenes)"},
    {"sampler.seed", "Seed of the first trajectory; trajectory i uses seed + i"},
    {"sampler.apply_guidance_during_layout", "Apply negative-prompt guidance before the graft step"},
    {"sampler.scorer_fallback", "On scorer failure graft at t_max instead of aborting"},
    {"graft.mode", "fixed or dynamic"},
    {"graft.T", "Graft step for fixed mode"},
    {"graft.k", "Plateau lag k"},
    {"graft.epsilon", "Plateau tolerance"},
    {"graft.window", "Search window [lo, hi] as fractions of S"},
    {"scene.spacing", "Grid spacing of the default centroids"},
    {"scene.centroids", "Table of position phrase -> [x, y]; null for the default grid"},
    {"scene.layout_stdev", "Spread of each layout component"},
    {"scene.target_stdev", "Spread of the fused target mode"},
    {"scene.item_stdev", "Spread of the per-region target modes"},
    {"scene.fused_weight", "Weight of the fused target mode"},
    {"scene.tau", "Length scale of the toy similarity"},
    {"scene.r", "Evaluation radius; null for 3 * layout_stdev"},
    {"backend.kind", "analytic or remote"},
    {"backend.endpoint", "Model server URL for the remote backend"},
    {"backend.timeout_s", "Per-request timeout in seconds"},
    {"backend.retries", "Retries after a failed request"},
    {"prompts.items", "Item labels, a JSON list or comma-separated text"},
    {"prompts.groups", "Region grouping: auto, \"0;1,2\" or a JSON list of lists"},
    {"prompts.container", "Container word of every item"},
    {"batch.samples", "Trajectories per run"},
    {"batch.workers", "Worker threads when the backend allows concurrency"},
    {"output.dir", "Directory receiving every output file"},
    {"output.binary_states", "Also write float32 little-endian state dumps"},
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << content) || !f.flush()) {
        throw IoError("cannot write '" + path.string() + "'");
    }
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
    }
}

std::string index_name(const char* stem, std::size_t i, const char* ext) {
    return fmt::format("{}_{:04d}.{}", stem, i, ext);
}

std::string trace_csv(const SimilarityTrace& trace) {
    std::string out = "step,score\n";
    for (const auto& e : trace.entries()) {
        out += fmt::format("{},{}\n", e.step, e.score);
    }
    return out;
}

/// Options shared by commands that take a run config.
struct RunOptions {
    std::string config_path;
    std::map<std::string, std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string out;

    void attach(CLI::App& cmd) {
        cmd.add_option("--config", config_path, "Run-config JSON file")->check(CLI::ExistingFile);
        cmd.add_option("--seed", seed, "Alias of --sampler.seed");
        cmd.add_option("--out", out, "Alias of --output.dir");
        for (const auto& key : config_keys()) {
            cmd.add_option_function<std::string>(
                "--" + key, [this, key](const std::string& v) { overrides[key] = v; }, config_key_help(key));
        }
    }

    RunConfig resolve(const Json& base) const {
        Json doc = base;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            Json file = Json::parse(in, nullptr, false, true);
            if (file.is_discarded()) {
                throw ConfigError("", "config file '" + config_path + "' is not valid JSON");
            }
            // Per-command defaults sit below the file.
            Json layered = base;
            for (auto& [section, body] : file.items()) {
                if (layered.contains(section) && layered[section].is_object() && body.is_object()) {
                    for (auto& [k, v] : body.items()) {
                        layered[section][k] = v;
                    }
                } else {
                    layered[section] = body;
                }
            }
            doc = std::move(layered);
        }
        for (const auto& [key, value] : overrides) {
            apply_override(doc, key, value);
        }
        if (seed) {
            apply_override(doc, "sampler.seed", std::to_string(*seed));
        }
        if (!out.empty()) {
            apply_override(doc, "output.dir", Json(out).dump());
        }
        return config_from_json(doc);
    }
};

Json base_document(std::size_t samples) {
    Json doc = Json::object();
    doc["batch"]["samples"] = samples;
    return doc;
}

void write_effective_config(const RunConfig& config) {
    make_dir(config.output.dir);
    write_file(config.output.dir / "config.json", config_to_json(config).dump(2) + "\n");
}

std::vector<Trajectory> run_batch(const RunConfig& config, Scenario& s, const GraftPolicy& policy) {
    return sample_batch(config.sampler, s.conditions, *s.backend, s.scorer.get(), policy, config.batch.samples,
                        config.batch.workers);
}

int cmd_compile(const std::string& items, const std::string& groups, const std::string& container,
                std::ostream& out) {
    PromptSettings prompts;
    prompts.items = parse_item_list(items);
    prompts.groups = parse_grouping(groups);
    prompts.container = container;
    const auto specs = item_specs(prompts);
    const PromptBundle b = compile_prompts(specs, prompts.groups);
    Json doc;
    doc["id"] = b.id();
    doc["target"] = b.target;
    doc["layout"] = b.layout;
    doc["negative"] = b.negative;
    doc["regions"] = {{"groups", b.regions.groups}, {"positions", b.regions.positions}};
    doc["warnings"] = b.warnings;
    out << doc.dump(2) << "\n";
    return kExitOk;
}

int cmd_sample(const RunConfig& config, std::ostream& out) {
    Scenario s = build_scenario(config);
    write_effective_config(config);
    std::vector<Trajectory> runs;
    try {
        runs = run_batch(config, s, config.graft);
    } catch (const SamplingAborted& e) {
        std::ostringstream partial;
        write_trajectory_jsonl(partial, e.partial());
        write_file(config.output.dir / "partial.jsonl", partial.str());
        throw;
    }

    Json summary;
    summary["bundle_id"] = s.conditions.bundle_id;
    summary["target"] = s.bundle.target;
    summary["layout"] = s.bundle.layout;
    summary["negative"] = s.bundle.negative;
    summary["samples"] = Json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const Trajectory& t = runs[i];
        const auto traj_name = index_name("trajectory", i, "jsonl");
        write_file(config.output.dir / traj_name, trajectory_jsonl(t));
        Json entry;
        entry["index"] = i;
        entry["seed"] = t.config.seed;
        entry["graft_step"] = t.graft_step ? Json(*t.graft_step) : Json(nullptr);
        entry["terminal"] = t.terminal().data;
        entry["trajectory"] = traj_name;
        if (!t.similarity.empty()) {
            const auto trace_name = index_name("trace", i, "csv");
            write_file(config.output.dir / trace_name, trace_csv(t.similarity));
            entry["similarity_trace"] = trace_name;
        } else {
            entry["similarity_trace"] = nullptr;
        }
        if (config.output.binary_states) {
            const auto bin_name = index_name("states", i, "f32");
            std::ostringstream bin;
            write_states_f32(bin, t);
            write_file(config.output.dir / bin_name, bin.str());
            entry["states_f32"] = bin_name;
            entry["states_shape"] = {t.states.size(), t.terminal().dim()};
        }
        summary["samples"].push_back(std::move(entry));
    }
    const std::string text = summary.dump(2) + "\n";
    write_file(config.output.dir / "summary.json", text);
    out << text;
    return kExitOk;
}

int cmd_detect(const std::string& path, int steps, int k, double epsilon, double lo, double hi, std::ostream& out) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open trace '" + path + "'");
    }
    GraftPolicy policy = GraftPolicy::dynamic();
    policy.k = k;
    policy.epsilon = epsilon;
    policy.window_lo = lo;
    policy.window_hi = hi;
    policy.validate(steps);
    const SimilarityTrace trace = read_trace_csv(in);
    out << decide_graft_step(trace, policy, steps) << "\n";
    return kExitOk;
}

EvalReport run_rows(const RunConfig& config, const std::vector<std::pair<std::string, GraftPolicy>>& rows) {
    Scenario s = build_scenario(config);
    if (s.centroids.empty()) {
        throw ConfigError("scene.centroids", "evaluation needs a centroid for every region phrase");
    }
    std::vector<RunBatch> batches;
    for (const auto& [label, policy] : rows) {
        GraftPolicy p = policy;
        if (p.is_dynamic()) {
            p.k = config.graft.k;
            p.epsilon = config.graft.epsilon;
            p.window_lo = config.graft.window_lo;
            p.window_hi = config.graft.window_hi;
        }
        p.validate(config.sampler.total_steps);
        const auto runs = run_batch(config, s, p);
        batches.push_back(RunBatch::from_trajectories(label, runs));
    }
    return compare_runs(batches, s.centroids, config.scene.effective_radius());
}

int write_report(const RunConfig& config, const EvalReport& report, std::ostream& out) {
    write_effective_config(config);
    const std::string csv = report.to_csv();
    write_file(config.output.dir / "report.csv", csv);
    write_file(config.output.dir / "report.json", report.to_json());
    out << csv;
    return kExitOk;
}

int cmd_serve(const RunConfig& config, const std::string& host, int port, std::ostream& out) {
    StubServer server(stub_options(config), host, port);
    out << "listening on " << server.endpoint() << std::endl;
    server.wait();
    return kExitOk;
}

}  // namespace

const char* config_key_help(const std::string& dotted_key) {
    auto it = kKeyHelp.find(dotted_key);
    return it == kKeyHelp.end() ? "" : it->second;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Prompt Grafting flow sampler"};
    app.name("pgraft");
    app.require_subcommand(1);

    auto* compile = app.add_subcommand("compile", "Compile items into target, layout and negative prompts");
    std::string items;
    std::string groups = "auto";
    std::string container = "plate";
    compile->add_option("--items", items, "Comma-separated item labels")->required();
    compile->add_option("--groups", groups, "Region grouping: auto or \"0;1,2\"")->capture_default_str();
    compile->add_option("--container", container, "Container word of every item")->capture_default_str();

    auto* sample = app.add_subcommand("sample", "Sample trajectories and write them to the output directory");
    RunOptions sample_opts;
    sample_opts.attach(*sample);

    auto* detect = app.add_subcommand("detect", "Replay the plateau rule over a step,score CSV trace");
    std::string trace;
    int steps = 100;
    int k = 2;
    double epsilon = 0.002;
    double lo = 0.02;
    double hi = 0.20;
    detect->add_option("--trace", trace, "CSV file with step,score rows")->required();
    detect->add_option("--steps", steps, "Total steps S")->capture_default_str();
    detect->add_option("--k", k, "Plateau lag k")->capture_default_str();
    detect->add_option("--epsilon", epsilon, "Plateau tolerance")->capture_default_str();
    detect->add_option("--window-lo", lo, "Window start as a fraction of S")->capture_default_str();
    detect->add_option("--window-hi", hi, "Window end as a fraction of S")->capture_default_str();

    auto* eval = app.add_subcommand("eval", "Run the ablation grid and write report.csv and report.json");
    RunOptions eval_opts;
    eval_opts.attach(*eval);

    auto* demo = app.add_subcommand("demo-separation", "Compare target-only sampling with dynamic grafting");
    RunOptions demo_opts;
    demo_opts.attach(*demo);

    auto* serve = app.add_subcommand("serve-stub", "Serve the configured analytic scene over the wire protocol");
    RunOptions serve_opts;
    serve_opts.attach(*serve);
    std::string host = "127.0.0.1";
    int port = 8765;
    serve->add_option("--host", host, "Bind address")->capture_default_str();
    serve->add_option("--port", port, "Port; 0 picks a free one")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        // Subcommand --help arrives here with the subcommand as context.
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            for (auto* sub : app.get_subcommands()) {
                out << sub->help();
                return kExitOk;
            }
            out << app.help();
            return kExitOk;
        }
        err << "usage error: " << e.what() << "\n" << "run 'pgraft --help' for usage\n";
        return kExitUsage;
    }

    try {
        if (compile->parsed()) {
            return cmd_compile(items, groups, container, out);
        }
        if (sample->parsed()) {
            return cmd_sample(sample_opts.resolve(Json::object()), out);
        }
        if (detect->parsed()) {
            return cmd_detect(trace, steps, k, epsilon, lo, hi, out);
        }
        if (eval->parsed()) {
            const RunConfig config = eval_opts.resolve(base_document(1000));
            return write_report(config, run_rows(config, ablation_grid()), out);
        }
        if (demo->parsed()) {
            const RunConfig config = demo_opts.resolve(base_document(1000));
            const auto grid = ablation_grid();
            return write_report(config, run_rows(config, {grid.front(), grid.back()}), out);
        }
        if (serve->parsed()) {
            return cmd_serve(serve_opts.resolve(Json::object()), host, port, out);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SamplingAborted& e) {
        err << (e.cause() == SamplingAborted::Cause::Numeric ? "numeric failure: " : "backend failure: ") << e.what()
            << "\n";
        return e.cause() == SamplingAborted::Cause::Numeric ? kExitNumeric : kExitBackend;
    } catch (const NumericFailure& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const BackendError& e) {
        err << "backend failure: " << e.what() << "\n";
        return kExitBackend;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const InvalidArgument& e) {
        err << "invalid input: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace pgraft::app
