#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pgraft/sampler.hpp"

namespace pgraft {

struct RemoteConfig {
    std::string endpoint;  ///< http://host:port
    std::chrono::milliseconds timeout{std::chrono::seconds(120)};
    int retries = 2;

    /// Throws ConfigError for a malformed endpoint or negative retries.
    void validate() const;
};

struct HealthInfo {
    bool ok = false;
    std::vector<std::size_t> latent_shape;
    bool concurrent_safe = false;

    std::size_t latent_size() const;
};

struct WireCondition {
    std::string id;
    std::string text;
};

/// Client for the model-server wire protocol. Each call opens its own connection,
/// so one client may be shared across threads when the server allows it.
class RemoteClient {
public:
    explicit RemoteClient(RemoteConfig config);

    const RemoteConfig& config() const noexcept { return m_config; }

    HealthInfo health();
    /// One request carrying every condition; returns id -> velocity.
    std::map<std::string, Vector> velocity(const State& state, double t, std::span<const WireCondition> conditions);
    /// Score in [-1, 1].
    double similarity(std::span<const double> state, const std::string& text);
    /// PNG bytes.
    std::vector<std::uint8_t> decode(std::span<const double> state);

    /// Requests issued, retries included.
    std::uint64_t requests() const noexcept { return m_requests.load(); }

private:
    std::string post(const std::string& path, const std::string& body);
    std::string get(const std::string& path);
    std::vector<std::size_t> shape_for(std::size_t dim);

    RemoteConfig m_config;
    std::vector<std::size_t> m_latent_shape;
    std::atomic<std::uint64_t> m_requests{0};
};

/// VelocityModel over the wire; checks health on construction.
class RemoteBackend : public VelocityModel {
public:
    explicit RemoteBackend(RemoteClient& client);

    std::vector<Vector> velocities(const State& state, double t,
                                   std::span<const Condition* const> conditions) override;
    bool concurrent_safe() const override { return m_health.concurrent_safe; }
    const HealthInfo& health() const noexcept { return m_health; }

private:
    RemoteClient& m_client;
    HealthInfo m_health;
};

/// Server-side similarity; the server decodes the latent itself.
class RemoteScorer : public SimilarityScorer {
public:
    explicit RemoteScorer(RemoteClient& client, bool concurrent_safe = false)
        : m_client(client), m_concurrent_safe(concurrent_safe) {}

    double similarity(std::span<const double> decoded, const Condition& prompt) override;
    bool concurrent_safe() const override { return m_concurrent_safe; }

private:
    RemoteClient& m_client;
    bool m_concurrent_safe;
};

}  // namespace pgraft
