#pragma once

// JSON shapes shared by the remote client and the stub server.

#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgraft/errors.hpp"
#include "pgraft/wire.hpp"

namespace pgraft::wire {

using Json = nlohmann::json;
using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        out += (i ? "," : "") + std::to_string(shape[i]);
    }
    return out + "]";
}

inline Json state_json(std::span<const double> data, const Shape& shape) {
    return Json{{"shape", shape}, {"data_b64", encode_f32(data)}};
}

/// Field lookup that reports schema violations as ProtocolError.
inline const Json& field(const Json& body, const char* key, const char* where) {
    if (!body.is_object() || !body.contains(key)) {
        throw ProtocolError(std::string(where) + ": missing field '" + key + "'");
    }
    return body.at(key);
}

inline Shape read_shape(const Json& j, const char* where) {
    if (!j.is_array() || j.empty()) {
        throw ProtocolError(std::string(where) + ": shape must be a non-empty array");
    }
    Shape shape;
    for (const auto& d : j) {
        if (!d.is_number_unsigned() || d.get<std::size_t>() == 0) {
            throw ProtocolError(std::string(where) + ": shape entries must be positive integers");
        }
        shape.push_back(d.get<std::size_t>());
    }
    return shape;
}

inline std::string read_string(const Json& j, const char* key, const char* where) {
    const Json& v = field(j, key, where);
    if (!v.is_string()) {
        throw ProtocolError(std::string(where) + ": field '" + key + "' must be a string");
    }
    return v.get<std::string>();
}

/// Decodes {shape, data_b64}; the payload length must match the shape.
inline Vector read_state(const Json& j, Shape* shape_out, const char* where) {
    const Shape shape = read_shape(field(j, "shape", where), where);
    Vector data = decode_f32(read_string(j, "data_b64", where));
    if (data.size() != shape_size(shape)) {
        throw ProtocolError(std::string(where) + ": payload holds " + std::to_string(data.size()) +
                            " values, shape " + shape_str(shape) + " needs " + std::to_string(shape_size(shape)));
    }
    if (shape_out != nullptr) {
        *shape_out = shape;
    }
    return data;
}

inline Json parse_body(const std::string& body, const char* where) {
    Json j = Json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ProtocolError(std::string(where) + ": body is not a JSON object");
    }
    return j;
}

}  // namespace pgraft::wire
