#include "pgraft/remote.hpp"

#include <cmath>

#include <httplib.h>

#include "pgraft/log.hpp"
#include "wire_json.hpp"

namespace pgraft {

using wire::Json;

void RemoteConfig::validate() const {
    const std::string scheme = "http://";
    if (endpoint.rfind(scheme, 0) != 0 || endpoint.size() == scheme.size()) {
        throw ConfigError("backend.endpoint", "expected http://host[:port], got '" + endpoint + "'");
    }
    const auto rest = endpoint.substr(scheme.size());
    const auto colon = rest.find(':');
    if (colon == 0) {
        throw ConfigError("backend.endpoint", "missing host in '" + endpoint + "'");
    }
    if (colon != std::string::npos) {
        const auto port = rest.substr(colon + 1);
        const bool digits = !port.empty() && port.size() <= 5 && port.find_first_not_of("0123456789") == std::string::npos;
        if (!digits || std::stoi(port) > 65535) {
            throw ConfigError("backend.endpoint", "bad port in '" + endpoint + "'");
        }
    }
    if (retries < 0) {
        throw ConfigError("backend.retries", "must be >= 0");
    }
    if (timeout.count() <= 0) {
        throw ConfigError("backend.timeout", "must be positive");
    }
}

std::size_t HealthInfo::latent_size() const { return wire::shape_size(latent_shape); }

RemoteClient::RemoteClient(RemoteConfig config) : m_config(std::move(config)) { m_config.validate(); }

namespace {

std::string request_error(const httplib::Result& res) {
    if (!res) {
        return httplib::to_string(res.error());
    }
    return "HTTP " + std::to_string(res->status);
}

}  // namespace

std::string RemoteClient::post(const std::string& path, const std::string& body) {
    std::string last;
    for (int attempt = 0; attempt <= m_config.retries; ++attempt) {
        httplib::Client cli(m_config.endpoint);
        cli.set_connection_timeout(m_config.timeout);
        cli.set_read_timeout(m_config.timeout);
        cli.set_write_timeout(m_config.timeout);
        ++m_requests;
        auto res = cli.Post(path, body, "application/json");
        if (res && res->status >= 200 && res->status < 300) {
            return res->body;
        }
        if (res && res->status >= 400 && res->status < 500) {
            throw ProtocolError("POST " + path + " rejected with HTTP " + std::to_string(res->status) + ": " +
                                res->body);
        }
        last = request_error(res);
        log()->warn("POST {} attempt {} failed: {}", path, attempt + 1, last);
    }
    throw BackendUnavailable("POST " + m_config.endpoint + path + " failed after " +
                             std::to_string(m_config.retries + 1) + " attempts: " + last);
}

std::string RemoteClient::get(const std::string& path) {
    std::string last;
    for (int attempt = 0; attempt <= m_config.retries; ++attempt) {
        httplib::Client cli(m_config.endpoint);
        cli.set_connection_timeout(m_config.timeout);
        cli.set_read_timeout(m_config.timeout);
        ++m_requests;
        auto res = cli.Get(path);
        if (res && res->status >= 200 && res->status < 300) {
            return res->body;
        }
        if (res && res->status >= 400 && res->status < 500) {
            throw ProtocolError("GET " + path + " rejected with HTTP " + std::to_string(res->status));
        }
        last = request_error(res);
        log()->warn("GET {} attempt {} failed: {}", path, attempt + 1, last);
    }
    throw BackendUnavailable("GET " + m_config.endpoint + path + " failed after " +
                             std::to_string(m_config.retries + 1) + " attempts: " + last);
}

HealthInfo RemoteClient::health() {
    const Json j = wire::parse_body(get("/v1/health"), "/v1/health");
    HealthInfo info;
    const Json& ok = wire::field(j, "ok", "/v1/health");
    if (!ok.is_boolean()) {
        throw ProtocolError("/v1/health: field 'ok' must be a boolean");
    }
    info.ok = ok.get<bool>();
    info.latent_shape = wire::read_shape(wire::field(j, "latent_shape", "/v1/health"), "/v1/health");
    const Json& safe = wire::field(j, "concurrent_safe", "/v1/health");
    if (!safe.is_boolean()) {
        throw ProtocolError("/v1/health: field 'concurrent_safe' must be a boolean");
    }
    info.concurrent_safe = safe.get<bool>();
    m_latent_shape = info.latent_shape;
    return info;
}

std::vector<std::size_t> RemoteClient::shape_for(std::size_t dim) {
    if (m_latent_shape.empty()) {
        return {dim};
    }
    if (wire::shape_size(m_latent_shape) != dim) {
        throw ProtocolError("state shape " + wire::shape_str({dim}) + " does not match server latent_shape " +
                            wire::shape_str(m_latent_shape));
    }
    return m_latent_shape;
}

std::map<std::string, Vector> RemoteClient::velocity(const State& state, double t,
                                                     std::span<const WireCondition> conditions) {
    const auto shape = shape_for(state.dim());
    Json req{{"step", state.step}, {"t", t}, {"state", wire::state_json(state.data, shape)}};
    Json conds = Json::array();
    for (const auto& c : conditions) {
        conds.push_back({{"id", c.id}, {"text", c.text}});
    }
    req["conditions"] = std::move(conds);

    const Json res = wire::parse_body(post("/v1/velocity", req.dump()), "/v1/velocity");
    const Json& list = wire::field(res, "velocities", "/v1/velocity");
    if (!list.is_array()) {
        throw ProtocolError("/v1/velocity: 'velocities' must be an array");
    }
    std::map<std::string, Vector> received;
    for (const auto& item : list) {
        received[wire::read_string(item, "id", "/v1/velocity")] =
            wire::decode_f32(wire::read_string(item, "data_b64", "/v1/velocity"));
    }
    std::map<std::string, Vector> out;
    for (const auto& c : conditions) {
        auto it = received.find(c.id);
        if (it == received.end()) {
            throw ProtocolError("/v1/velocity: response is missing velocity for condition id '" + c.id + "'");
        }
        if (it->second.size() != state.dim()) {
            throw ProtocolError("/v1/velocity: velocity '" + c.id + "' has shape " +
                                wire::shape_str({it->second.size()}) + ", state has shape " +
                                wire::shape_str(shape));
        }
        out[c.id] = std::move(it->second);
    }
    return out;
}

double RemoteClient::similarity(std::span<const double> state, const std::string& text) {
    const Json req{{"state", wire::state_json(state, shape_for(state.size()))}, {"text", text}};
    const Json res = wire::parse_body(post("/v1/similarity", req.dump()), "/v1/similarity");
    const Json& score = wire::field(res, "score", "/v1/similarity");
    if (!score.is_number()) {
        throw ProtocolError("/v1/similarity: 'score' must be a number");
    }
    const double value = score.get<double>();
    if (!std::isfinite(value) || value < -1.0 || value > 1.0) {
        throw ProtocolError("/v1/similarity: score " + std::to_string(value) + " outside [-1, 1]");
    }
    return value;
}

std::vector<std::uint8_t> RemoteClient::decode(std::span<const double> state) {
    const Json req{{"state", wire::state_json(state, shape_for(state.size()))}};
    const Json res = wire::parse_body(post("/v1/decode", req.dump()), "/v1/decode");
    return wire::base64_decode(wire::read_string(res, "image_png_b64", "/v1/decode"));
}

RemoteBackend::RemoteBackend(RemoteClient& client) : m_client(client), m_health(client.health()) {
    if (!m_health.ok) {
        throw BackendUnavailable("server at " + client.config().endpoint + " reports not ok");
    }
}

std::vector<Vector> RemoteBackend::velocities(const State& state, double t,
                                              std::span<const Condition* const> conditions) {
    std::vector<WireCondition> wire_conditions;
    wire_conditions.reserve(conditions.size());
    for (const Condition* c : conditions) {
        wire_conditions.push_back({c->id, c->text});
    }
    auto by_id = m_client.velocity(state, t, wire_conditions);
    std::vector<Vector> out;
    out.reserve(conditions.size());
    for (const Condition* c : conditions) {
        out.push_back(by_id.at(c->id));
    }
    return out;
}

double RemoteScorer::similarity(std::span<const double> decoded, const Condition& prompt) {
    return m_client.similarity(decoded, prompt.text);
}

}  // namespace pgraft
