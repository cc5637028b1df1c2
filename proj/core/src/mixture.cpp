#include "pgraft/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pgraft/errors.hpp"

namespace pgraft {

namespace {

struct ComponentTerms {
    double log_weight;  // unnormalised log responsibility
    double a;
    double b;
};

double squared_distance(std::span<const double> x, std::span<const double> mu, double scale) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - scale * mu[i];
        acc += d * d;
    }
    return acc;
}

void check_point(std::span<const double> x, const MixtureSpec& spec) {
    if (x.size() != spec.dim) {
        throw InvalidArgument("point has dimension " + std::to_string(x.size()) + ", mixture has " +
                              std::to_string(spec.dim));
    }
    if (spec.components.empty()) {
        throw InvalidArgument("mixture has no components");
    }
}

std::vector<ComponentTerms> component_terms(std::span<const double> x, double t, const MixtureSpec& spec) {
    check_point(x, spec);
    const double noise = 1.0 - t;
    const auto dim = static_cast<double>(spec.dim);
    std::vector<ComponentTerms> terms;
    terms.reserve(spec.components.size());
    for (const auto& c : spec.components) {
        const double s2 = c.stdev * c.stdev;
        const double var = t * t * s2 + noise * noise;
        if (!(var > 0.0)) {
            throw NumericFailure(-1, "degenerate posterior at t=" + std::to_string(t) +
                                         " (component with zero stdev)");
        }
        const double a = (t * s2 - noise) / var;
        const double d2 = squared_distance(x, c.mean, t);
        terms.push_back({std::log(c.weight) - 0.5 * d2 / var - 0.5 * dim * std::log(var), a, 1.0 - t * a});
    }
    return terms;
}

Vector normalise(const std::vector<ComponentTerms>& terms) {
    double peak = -std::numeric_limits<double>::infinity();
    for (const auto& term : terms) {
        peak = std::max(peak, term.log_weight);
    }
    Vector r(terms.size());
    double total = 0.0;
    for (std::size_t j = 0; j < terms.size(); ++j) {
        r[j] = std::exp(terms[j].log_weight - peak);
        total += r[j];
    }
    for (double& v : r) {
        v /= total;
    }
    return r;
}

}  // namespace

void MixtureSpec::validate() const {
    if (dim == 0) {
        throw InvalidArgument("mixture dimension must be positive");
    }
    if (components.empty()) {
        throw InvalidArgument("mixture needs at least one component");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < components.size(); ++j) {
        const auto& c = components[j];
        if (c.mean.size() != dim) {
            throw InvalidArgument("component " + std::to_string(j) + " mean has length " +
                                  std::to_string(c.mean.size()) + ", expected " + std::to_string(dim));
        }
        if (!std::isfinite(c.stdev) || c.stdev < 0.0) {
            throw InvalidArgument("component " + std::to_string(j) + " stdev must be finite and >= 0");
        }
        if (!std::isfinite(c.weight) || c.weight <= 0.0) {
            throw InvalidArgument("component " + std::to_string(j) + " weight must be positive");
        }
        for (double m : c.mean) {
            if (!std::isfinite(m)) {
                throw InvalidArgument("component " + std::to_string(j) + " mean is not finite");
            }
        }
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InvalidArgument("mixture weights sum to " + std::to_string(total) + ", expected 1");
    }
}

Vector MixtureSpec::mean() const {
    Vector out(dim, 0.0);
    for (const auto& c : components) {
        for (std::size_t i = 0; i < dim; ++i) {
            out[i] += c.weight * c.mean[i];
        }
    }
    return out;
}

double MixtureSpec::density(std::span<const double> x) const {
    check_point(x, *this);
    const auto d = static_cast<double>(dim);
    double total = 0.0;
    for (const auto& c : components) {
        const double var = c.stdev * c.stdev;
        const double norm = std::pow(2.0 * std::numbers::pi * var, -0.5 * d);
        total += c.weight * norm * std::exp(-0.5 * squared_distance(x, c.mean, 1.0) / var);
    }
    return total;
}

Vector responsibilities(std::span<const double> x, double t, const MixtureSpec& spec) {
    return normalise(component_terms(x, t, spec));
}

Vector mixture_velocity(std::span<const double> x, double t, const MixtureSpec& spec) {
    const auto terms = component_terms(x, t, spec);
    const auto r = normalise(terms);
    Vector v(spec.dim, 0.0);
    for (std::size_t j = 0; j < terms.size(); ++j) {
        const auto& mu = spec.components[j].mean;
        const double a = terms[j].a;
        const double b = terms[j].b;
        for (std::size_t i = 0; i < spec.dim; ++i) {
            v[i] += r[j] * (b * mu[i] + a * x[i]);
        }
    }
    return v;
}

double layout_similarity(std::span<const double> x, const MixtureSpec& spec, double tau) {
    check_point(x, spec);
    if (!(tau > 0.0)) {
        throw InvalidArgument("similarity temperature tau must be positive");
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : spec.components) {
        best = std::min(best, squared_distance(x, c.mean, 1.0));
    }
    return std::exp(-best / (2.0 * tau * tau));
}

}  // namespace pgraft
