#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

namespace pgraft {

// Standard-normal generator with a fixed transform, so draws are identical across
// standard library implementations (std::normal_distribution is not).
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : m_engine(seed) {}

    double next() {
        if (m_has_spare) {
            m_has_spare = false;
            return m_spare;
        }
        // u1 in (0, 1], u2 in [0, 1)
        const double u1 = (static_cast<double>(m_engine() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(m_engine() >> 11) * 0x1.0p-53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        m_spare = radius * std::sin(angle);
        m_has_spare = true;
        return radius * std::cos(angle);
    }

    void fill(std::span<double> out) {
        for (double& v : out) {
            v = next();
        }
    }

private:
    std::mt19937_64 m_engine;
    double m_spare = 0.0;
    bool m_has_spare = false;
};

}  // namespace pgraft
