#include "run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <pgraft/errors.hpp>

namespace pgraft::app {

Json default_config_json() {
    return Json::parse(R"({
  "sampler": {"steps": 100, "guidance": 12.0, "dim": 2, "seed": 0,
              "apply_guidance_during_layout": true, "scorer_fallback": false},
  "graft": {"mode": "dynamic", "T": 0, "k": 2, "epsilon": 0.002, "window": [0.02, 0.2]},
  "scene": {"spacing": 8.0, "centroids": null, "layout_stdev": 0.2, "target_stdev": 0.8,
            "item_stdev": 0.2, "fused_weight": 0.95, "tau": 6.0, "r": null},
  "backend": {"kind": "analytic", "endpoint": "http://127.0.0.1:8765", "timeout_s": 120.0, "retries": 2},
  "prompts": {"items": ["rice", "potato salad"], "groups": "auto", "container": "plate"},
  "batch": {"samples": 1, "workers": 1},
  "output": {"dir": "pgraft-out", "binary_states": false}
})");
}

namespace {

void collect_keys(const Json& node, const std::string& prefix, std::vector<std::string>& out) {
    for (const auto& [key, value] : node.items()) {
        const std::string dotted = prefix.empty() ? key : prefix + "." + key;
        if (value.is_object()) {
            collect_keys(value, dotted, out);
        } else {
            out.push_back(dotted);
        }
    }
}

void merge(Json& base, const Json& layer, const std::string& prefix) {
    if (!layer.is_object()) {
        throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected a table");
    }
    for (const auto& [key, value] : layer.items()) {
        const std::string dotted = prefix.empty() ? key : prefix + "." + key;
        if (!base.contains(key)) {
            throw ConfigError(dotted, "unknown key");
        }
        if (base[key].is_object()) {
            merge(base[key], value, dotted);
        } else {
            base[key] = value;
        }
    }
}

template <class T>
T read(const Json& doc, const std::string& dotted) {
    const Json* node = &doc;
    std::istringstream parts(dotted);
    for (std::string part; std::getline(parts, part, '.');) {
        node = &node->at(part);
    }
    try {
        return node->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(dotted, "has the wrong type (" + std::string(node->type_name()) + ")");
    }
}

const Json& node_at(const Json& doc, const std::string& dotted) {
    const Json* node = &doc;
    std::istringstream parts(dotted);
    for (std::string part; std::getline(parts, part, '.');) {
        node = &node->at(part);
    }
    return *node;
}

std::size_t read_count(const Json& doc, const std::string& dotted) {
    const Json& node = node_at(doc, dotted);
    if (!node.is_number_integer() || node.get<long long>() < 0) {
        throw ConfigError(dotted, "must be a non-negative integer");
    }
    return node.get<std::size_t>();
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    collect_keys(default_config_json(), "", keys);
    return keys;
}

RunConfig config_from_json(const Json& doc) {
    Json full = default_config_json();
    merge(full, doc, "");

    RunConfig c;
    c.sampler.total_steps = read<int>(full, "sampler.steps");
    c.sampler.guidance = read<double>(full, "sampler.guidance");
    c.sampler.dim = read_count(full, "sampler.dim");
    {
        const Json& seed = node_at(full, "sampler.seed");
        if (!seed.is_number_unsigned()) {
            throw ConfigError("sampler.seed", "must be a non-negative 64-bit integer");
        }
        c.sampler.seed = seed.get<std::uint64_t>();
    }
    c.sampler.apply_guidance_during_layout = read<bool>(full, "sampler.apply_guidance_during_layout");
    c.sampler.scorer_fallback = read<bool>(full, "sampler.scorer_fallback");

    const auto mode = read<std::string>(full, "graft.mode");
    if (mode == "fixed") {
        c.graft = GraftPolicy::fixed(read<int>(full, "graft.T"));
    } else if (mode == "dynamic") {
        c.graft = GraftPolicy::dynamic();
        c.graft.fixed_step = read<int>(full, "graft.T");
    } else {
        throw ConfigError("graft.mode", "must be 'fixed' or 'dynamic', got '" + mode + "'");
    }
    c.graft.k = read<int>(full, "graft.k");
    c.graft.epsilon = read<double>(full, "graft.epsilon");
    const auto window = read<std::vector<double>>(full, "graft.window");
    if (window.size() != 2) {
        throw ConfigError("graft.window", "must be [lo, hi]");
    }
    c.graft.window_lo = window[0];
    c.graft.window_hi = window[1];

    c.scene_spacing = read<double>(full, "scene.spacing");
    if (!(c.scene_spacing > 0.0)) {
        throw ConfigError("scene.spacing", "must be positive");
    }
    c.scene = SceneSpec::defaults(c.scene_spacing);
    if (const Json& centroids = node_at(full, "scene.centroids"); !centroids.is_null()) {
        if (!centroids.is_object() || centroids.empty()) {
            throw ConfigError("scene.centroids", "must be a table of phrase -> [x, y]");
        }
        c.scene.centroids.clear();
        for (const auto& [phrase, point] : centroids.items()) {
            if (!point.is_array() || !std::all_of(point.begin(), point.end(), [](const Json& v) { return v.is_number(); })) {
                throw ConfigError("scene.centroids", "point of '" + phrase + "' must be a list of numbers");
            }
            c.scene.centroids[phrase] = point.get<std::vector<double>>();
        }
    }
    c.scene.layout_stdev = read<double>(full, "scene.layout_stdev");
    c.scene.target_stdev = read<double>(full, "scene.target_stdev");
    c.scene.item_stdev = read<double>(full, "scene.item_stdev");
    c.scene.fused_weight = read<double>(full, "scene.fused_weight");
    c.scene.tau = read<double>(full, "scene.tau");
    if (const Json& r = node_at(full, "scene.r"); !r.is_null()) {
        c.scene.radius = read<double>(full, "scene.r");
        if (!(c.scene.radius > 0.0)) {
            throw ConfigError("scene.r", "must be positive or null");
        }
    }

    const auto kind = read<std::string>(full, "backend.kind");
    if (kind == "analytic") {
        c.backend.kind = BackendSettings::Kind::Analytic;
    } else if (kind == "remote") {
        c.backend.kind = BackendSettings::Kind::Remote;
    } else {
        throw ConfigError("backend.kind", "must be 'analytic' or 'remote', got '" + kind + "'");
    }
    c.backend.remote.endpoint = read<std::string>(full, "backend.endpoint");
    const double timeout = read<double>(full, "backend.timeout_s");
    if (!(timeout > 0.0) || !std::isfinite(timeout)) {
        throw ConfigError("backend.timeout_s", "must be positive");
    }
    c.backend.remote.timeout = std::chrono::milliseconds(static_cast<long long>(std::llround(timeout * 1000.0)));
    c.backend.remote.retries = read<int>(full, "backend.retries");

    if (const Json& items = node_at(full, "prompts.items"); items.is_string()) {
        c.prompts.items = parse_item_list(items.get<std::string>());
    } else {
        c.prompts.items = read<std::vector<std::string>>(full, "prompts.items");
    }
    if (const Json& groups = node_at(full, "prompts.groups"); groups.is_string()) {
        try {
            c.prompts.groups = parse_grouping(groups.get<std::string>());
        } catch (const InvalidArgument& e) {
            throw ConfigError("prompts.groups", e.what());
        }
    } else {
        c.prompts.groups = read<Grouping>(full, "prompts.groups");
    }
    c.prompts.container = read<std::string>(full, "prompts.container");

    c.batch.samples = read_count(full, "batch.samples");
    c.batch.workers = read_count(full, "batch.workers");
    c.output.dir = read<std::string>(full, "output.dir");
    c.output.binary_states = read<bool>(full, "output.binary_states");

    validate(c);
    return c;
}

void validate(const RunConfig& c) {
    c.sampler.validate();
    c.graft.validate(c.sampler.total_steps);
    if (c.backend.kind == BackendSettings::Kind::Analytic && c.sampler.dim != 2) {
        throw ConfigError("sampler.dim", "analytic scenes are 2-D, got " + std::to_string(c.sampler.dim));
    }
    if (c.backend.kind == BackendSettings::Kind::Remote) {
        c.backend.remote.validate();
    }
    try {
        c.scene.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError("scene", e.what());
    }
    if (c.prompts.items.empty()) {
        throw ConfigError("prompts.items", "at least one item is required");
    }
    if (c.batch.samples == 0) {
        throw ConfigError("batch.samples", "must be >= 1");
    }
    if (c.batch.workers == 0) {
        throw ConfigError("batch.workers", "must be >= 1");
    }
    if (c.output.dir.empty()) {
        throw ConfigError("output.dir", "must be non-empty");
    }
}

Json config_to_json(const RunConfig& c) {
    Json doc = default_config_json();
    doc["sampler"]["steps"] = c.sampler.total_steps;
    doc["sampler"]["guidance"] = c.sampler.guidance;
    doc["sampler"]["dim"] = c.sampler.dim;
    doc["sampler"]["seed"] = c.sampler.seed;
    doc["sampler"]["apply_guidance_during_layout"] = c.sampler.apply_guidance_during_layout;
    doc["sampler"]["scorer_fallback"] = c.sampler.scorer_fallback;

    doc["graft"]["mode"] = c.graft.is_dynamic() ? "dynamic" : "fixed";
    doc["graft"]["T"] = c.graft.fixed_step;
    doc["graft"]["k"] = c.graft.k;
    doc["graft"]["epsilon"] = c.graft.epsilon;
    doc["graft"]["window"] = {c.graft.window_lo, c.graft.window_hi};

    doc["scene"]["spacing"] = c.scene_spacing;
    Json centroids = Json::object();
    for (const auto& [phrase, point] : c.scene.centroids) {
        centroids[phrase] = point;
    }
    doc["scene"]["centroids"] = std::move(centroids);
    doc["scene"]["layout_stdev"] = c.scene.layout_stdev;
    doc["scene"]["target_stdev"] = c.scene.target_stdev;
    doc["scene"]["item_stdev"] = c.scene.item_stdev;
    doc["scene"]["fused_weight"] = c.scene.fused_weight;
    doc["scene"]["tau"] = c.scene.tau;
    doc["scene"]["r"] = c.scene.effective_radius();

    doc["backend"]["kind"] = c.backend.kind == BackendSettings::Kind::Analytic ? "analytic" : "remote";
    doc["backend"]["endpoint"] = c.backend.remote.endpoint;
    doc["backend"]["timeout_s"] = static_cast<double>(c.backend.remote.timeout.count()) / 1000.0;
    doc["backend"]["retries"] = c.backend.remote.retries;

    doc["prompts"]["items"] = c.prompts.items;
    doc["prompts"]["groups"] = c.prompts.groups ? Json(*c.prompts.groups) : Json("auto");
    doc["prompts"]["container"] = c.prompts.container;

    doc["batch"]["samples"] = c.batch.samples;
    doc["batch"]["workers"] = c.batch.workers;
    doc["output"]["dir"] = c.output.dir.string();
    doc["output"]["binary_states"] = c.output.binary_states;
    return doc;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", "cannot open config file '" + path.string() + "'");
    }
    Json doc = Json::parse(in, nullptr, false, true);
    if (doc.is_discarded()) {
        throw ConfigError("", "config file '" + path.string() + "' is not valid JSON");
    }
    return config_from_json(doc);
}

void apply_override(Json& doc, const std::string& dotted_key, const std::string& text) {
    const auto keys = config_keys();
    const bool known = std::find(keys.begin(), keys.end(), dotted_key) != keys.end();
    if (!known) {
        throw ConfigError(dotted_key, "unknown key");
    }
    Json value = Json::parse(text, nullptr, false);
    if (value.is_discarded()) {
        value = text;
    }
    Json* node = &doc;
    std::istringstream parts(dotted_key);
    std::vector<std::string> path;
    for (std::string part; std::getline(parts, part, '.');) {
        path.push_back(part);
    }
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        Json& child = (*node)[path[i]];
        if (!child.is_object()) {
            child = Json::object();
        }
        node = &child;
    }
    (*node)[path.back()] = std::move(value);
}

std::vector<ItemSpec> item_specs(const PromptSettings& prompts) {
    std::vector<ItemSpec> out;
    for (const auto& label : prompts.items) {
        out.push_back({label, prompts.container});
    }
    return out;
}

}  // namespace pgraft::app
