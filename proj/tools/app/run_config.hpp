#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <pgraft/analytic.hpp>
#include <pgraft/detector.hpp>
#include <pgraft/prompt.hpp>
#include <pgraft/remote.hpp>
#include <pgraft/sampler.hpp>

namespace pgraft::app {

using Json = nlohmann::ordered_json;

struct BackendSettings {
    enum class Kind { Analytic, Remote };
    Kind kind = Kind::Analytic;
    RemoteConfig remote;
};

struct PromptSettings {
    std::vector<std::string> items{"rice", "potato salad"};
    std::optional<Grouping> groups;  ///< nullopt = auto
    std::string container = "plate";
};

struct BatchSettings {
    std::size_t samples = 1;
    std::size_t workers = 1;
};

struct OutputSettings {
    std::filesystem::path dir = "pgraft-out";
    bool binary_states = false;
};

struct RunConfig {
    SamplerConfig sampler;
    GraftPolicy graft = GraftPolicy::dynamic();
    double scene_spacing = 8.0;
    SceneSpec scene = SceneSpec::defaults();
    BackendSettings backend;
    PromptSettings prompts;
    BatchSettings batch;
    OutputSettings output;
};

/// Defaults as a JSON document; its key set is the schema.
Json default_config_json();

/// Layers `doc` over the defaults. Unknown keys and type mismatches throw ConfigError
/// naming the dotted key; the result is validated.
RunConfig config_from_json(const Json& doc);
Json config_to_json(const RunConfig& config);

RunConfig load_config(const std::filesystem::path& path);

/// Sets a dotted key from command-line text. The text is read as JSON when it parses,
/// else as a string. Unknown keys throw ConfigError.
void apply_override(Json& doc, const std::string& dotted_key, const std::string& text);

/// Every leaf key of the schema, dotted, in document order.
std::vector<std::string> config_keys();

void validate(const RunConfig& config);

std::vector<ItemSpec> item_specs(const PromptSettings& prompts);

}  // namespace pgraft::app
