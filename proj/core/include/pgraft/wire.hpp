#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pgraft/mixture.hpp"

namespace pgraft::wire {

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws ProtocolError on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Little-endian float32 bytes of `values`, rounded to nearest.
std::vector<std::uint8_t> pack_f32(std::span<const double> values);
/// Throws ProtocolError unless the byte count is a multiple of 4.
Vector unpack_f32(std::span<const std::uint8_t> bytes);

inline std::string encode_f32(std::span<const double> values) { return base64_encode(pack_f32(values)); }
inline Vector decode_f32(std::string_view text) { return unpack_f32(base64_decode(text)); }

/// Rounds through float32, the precision every wire payload carries.
Vector quantize_f32(std::span<const double> values);

}  // namespace pgraft::wire
