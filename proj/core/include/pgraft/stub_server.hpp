#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pgraft/mixture.hpp"

namespace pgraft {

struct StubOptions {
    enum class Mode {
        Analytic,  ///< exact mixture velocities, looked up by condition text
        Zero,      ///< zero vectors
        Echo,      ///< the request state, re-encoded
    };

    Mode mode = Mode::Analytic;
    std::map<std::string, MixtureSpec> mixtures;  ///< condition text -> mixture
    double tau = 6.0;
    std::optional<double> constant_score;  ///< overrides the analytic similarity
    std::vector<std::size_t> latent_shape{2};
    bool concurrent_safe = true;

    // Fault injection.
    std::string drop_velocity_id;   ///< omit this id from velocity responses
    std::size_t truncate_velocity = 0;  ///< drop this many trailing values from every velocity
    int fail_first = 0;             ///< answer HTTP 503 to this many requests first
};

struct StubCall {
    std::string path;
    int step = -1;  ///< velocity requests only
    std::vector<std::string> ids;
    std::vector<std::string> texts;
};

/// Minimal model server speaking the wire protocol, hosted on a background thread.
class StubServer {
public:
    /// port 0 picks a free port.
    explicit StubServer(StubOptions options, const std::string& host = "127.0.0.1", int port = 0);
    ~StubServer();

    StubServer(const StubServer&) = delete;
    StubServer& operator=(const StubServer&) = delete;

    int port() const noexcept { return m_port; }
    std::string endpoint() const;

    /// Blocks until stop() is called from elsewhere.
    void wait();
    void stop();

    std::vector<StubCall> calls() const;
    std::size_t count(const std::string& path) const;
    void clear_calls();

private:
    struct Impl;
    std::unique_ptr<Impl> m_impl;
    std::string m_host;
    int m_port = 0;
    std::thread m_thread;
};

}  // namespace pgraft
