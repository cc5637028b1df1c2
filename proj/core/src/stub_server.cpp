#include "pgraft/stub_server.hpp"

#include <httplib.h>

#include "pgraft/errors.hpp"
#include "pgraft/log.hpp"
#include "pgraft/png.hpp"
#include "wire_json.hpp"

namespace pgraft {

using wire::Json;

struct StubServer::Impl {
    StubOptions options;
    httplib::Server server;
    mutable std::mutex log_mutex;
    std::vector<StubCall> calls;
    std::mutex serial;  // held per request unless concurrent_safe
    std::mutex fault_mutex;
    int failures_left = 0;

    void record(StubCall call) {
        std::lock_guard lock(log_mutex);
        calls.push_back(std::move(call));
    }

    bool inject_failure() {
        std::lock_guard lock(fault_mutex);
        if (failures_left > 0) {
            --failures_left;
            return true;
        }
        return false;
    }

    const MixtureSpec& mixture_for(const std::string& text) const {
        auto it = options.mixtures.find(text);
        if (it == options.mixtures.end()) {
            throw InvalidArgument("no mixture registered for text '" + text + "'");
        }
        return it->second;
    }

    Vector read_request_state(const Json& body, const char* where) const {
        wire::Shape shape;
        Vector x = wire::read_state(wire::field(body, "state", where), &shape, where);
        if (shape != options.latent_shape) {
            throw ProtocolError(std::string(where) + ": state shape " + wire::shape_str(shape) +
                                " does not match latent_shape " + wire::shape_str(options.latent_shape));
        }
        return x;
    }

    Json velocity(const Json& body) {
        const Vector x = read_request_state(body, "/v1/velocity");
        const Json& t_field = wire::field(body, "t", "/v1/velocity");
        const Json& conds = wire::field(body, "conditions", "/v1/velocity");
        if (!t_field.is_number() || !conds.is_array()) {
            throw ProtocolError("/v1/velocity: 't' must be a number and 'conditions' an array");
        }
        const double t = t_field.get<double>();
        StubCall call{"/v1/velocity", body.value("step", -1), {}, {}};
        Json out = Json::array();
        for (const auto& c : conds) {
            const auto id = wire::read_string(c, "id", "/v1/velocity");
            const auto text = wire::read_string(c, "text", "/v1/velocity");
            call.ids.push_back(id);
            call.texts.push_back(text);
            if (id == options.drop_velocity_id) {
                continue;
            }
            Vector v;
            switch (options.mode) {
            case StubOptions::Mode::Analytic:
                v = mixture_velocity(x, t, mixture_for(text));
                break;
            case StubOptions::Mode::Zero:
                v.assign(x.size(), 0.0);
                break;
            case StubOptions::Mode::Echo:
                v = x;
                break;
            }
            v.resize(v.size() - std::min(v.size(), options.truncate_velocity));
            out.push_back({{"id", id}, {"data_b64", wire::encode_f32(v)}});
        }
        record(std::move(call));
        return Json{{"velocities", std::move(out)}};
    }

    Json similarity(const Json& body) {
        const Vector x = read_request_state(body, "/v1/similarity");
        const auto text = wire::read_string(body, "text", "/v1/similarity");
        record({"/v1/similarity", -1, {}, {text}});
        if (options.constant_score) {
            return Json{{"score", *options.constant_score}};
        }
        return Json{{"score", layout_similarity(x, mixture_for(text), options.tau)}};
    }

    Json decode(const Json& body) {
        const Vector x = read_request_state(body, "/v1/decode");
        record({"/v1/decode", -1, {}, {}});
        return Json{{"image_png_b64", wire::base64_encode(render_state_png(x))}};
    }

    template <class Fn>
    void handle(const httplib::Request& req, httplib::Response& res, Fn fn) {
        std::unique_lock<std::mutex> lock(serial, std::defer_lock);
        if (!options.concurrent_safe) {
            lock.lock();
        }
        if (inject_failure()) {
            res.status = 503;
            res.set_content(Json{{"error", "injected failure"}}.dump(), "application/json");
            return;
        }
        try {
            const Json body = wire::parse_body(req.body, req.path.c_str());
            res.set_content(fn(body).dump(), "application/json");
        } catch (const ProtocolError& e) {
            res.status = 400;
            res.set_content(Json{{"error", e.what()}}.dump(), "application/json");
        } catch (const std::exception& e) {
            res.status = 500;
            res.set_content(Json{{"error", e.what()}}.dump(), "application/json");
        }
    }
};

StubServer::StubServer(StubOptions options, const std::string& host, int port)
    : m_impl(std::make_unique<Impl>()), m_host(host) {
    for (const auto& [text, spec] : options.mixtures) {
        spec.validate();
        if (spec.dim != wire::shape_size(options.latent_shape)) {
            throw InvalidArgument("mixture for '" + text + "' has dimension " + std::to_string(spec.dim) +
                                  ", latent_shape is " + wire::shape_str(options.latent_shape));
        }
    }
    m_impl->options = std::move(options);
    m_impl->failures_left = m_impl->options.fail_first;

    Impl& impl = *m_impl;
    impl.server.Get("/v1/health", [&impl](const httplib::Request&, httplib::Response& res) {
        impl.record({"/v1/health", -1, {}, {}});
        if (impl.inject_failure()) {
            res.status = 503;
            return;
        }
        const Json body{{"ok", true},
                        {"latent_shape", impl.options.latent_shape},
                        {"concurrent_safe", impl.options.concurrent_safe}};
        res.set_content(body.dump(), "application/json");
    });
    impl.server.Post("/v1/velocity", [&impl](const httplib::Request& req, httplib::Response& res) {
        impl.handle(req, res, [&impl](const Json& b) { return impl.velocity(b); });
    });
    impl.server.Post("/v1/similarity", [&impl](const httplib::Request& req, httplib::Response& res) {
        impl.handle(req, res, [&impl](const Json& b) { return impl.similarity(b); });
    });
    impl.server.Post("/v1/decode", [&impl](const httplib::Request& req, httplib::Response& res) {
        impl.handle(req, res, [&impl](const Json& b) { return impl.decode(b); });
    });

    m_port = port == 0 ? impl.server.bind_to_any_port(host) : (impl.server.bind_to_port(host, port) ? port : -1);
    if (m_port <= 0) {
        throw BackendUnavailable("stub server could not bind " + host + ":" + std::to_string(port));
    }
    m_thread = std::thread([&impl] { impl.server.listen_after_bind(); });
    impl.server.wait_until_ready();
    log()->info("stub server listening on {}", endpoint());
}

StubServer::~StubServer() {
    stop();
    if (m_thread.joinable()) {
        m_thread.join();
    }
}

std::string StubServer::endpoint() const { return "http://" + m_host + ":" + std::to_string(m_port); }

void StubServer::wait() {
    if (m_thread.joinable()) {
        m_thread.join();
    }
}

void StubServer::stop() { m_impl->server.stop(); }

std::vector<StubCall> StubServer::calls() const {
    std::lock_guard lock(m_impl->log_mutex);
    return m_impl->calls;
}

std::size_t StubServer::count(const std::string& path) const {
    std::lock_guard lock(m_impl->log_mutex);
    return static_cast<std::size_t>(
        std::count_if(m_impl->calls.begin(), m_impl->calls.end(), [&](const StubCall& c) { return c.path == path; }));
}

void StubServer::clear_calls() {
    std::lock_guard lock(m_impl->log_mutex);
    m_impl->calls.clear();
}

}  // namespace pgraft
