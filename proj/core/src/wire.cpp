#include "pgraft/wire.hpp"

#include <bit>
#include <cstring>

#include <sodium.h>

#include "pgraft/errors.hpp"

namespace pgraft::wire {

namespace {

constexpr int kVariant = sodium_base64_VARIANT_ORIGINAL;

std::uint32_t to_little(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        v = ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
    }
    return v;
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(sodium_base64_encoded_len(bytes.size(), kVariant), '\0');
    sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(), kVariant);
    out.resize(out.size() - 1);  // trailing NUL
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    std::vector<std::uint8_t> out(text.size() / 4 * 3 + 3);
    std::size_t len = 0;
    const char* end = nullptr;
    if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len, &end, kVariant) != 0 ||
        end != text.data() + text.size()) {
        throw ProtocolError("malformed base64 payload");
    }
    out.resize(len);
    return out;
}

std::vector<std::uint8_t> pack_f32(std::span<const double> values) {
    std::vector<std::uint8_t> out(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto bits = to_little(std::bit_cast<std::uint32_t>(static_cast<float>(values[i])));
        std::memcpy(out.data() + 4 * i, &bits, 4);
    }
    return out;
}

Vector unpack_f32(std::span<const std::uint8_t> bytes) {
    if (bytes.size() % 4 != 0) {
        throw ProtocolError("float32 payload of " + std::to_string(bytes.size()) + " bytes is not a multiple of 4");
    }
    Vector out(bytes.size() / 4);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint32_t bits = 0;
        std::memcpy(&bits, bytes.data() + 4 * i, 4);
        out[i] = static_cast<double>(std::bit_cast<float>(to_little(bits)));
    }
    return out;
}

Vector quantize_f32(std::span<const double> values) {
    Vector out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = static_cast<double>(static_cast<float>(values[i]));
    }
    return out;
}

}  // namespace pgraft::wire
