#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pgraft {

using Vector = std::vector<double>;

/// One isotropic Gaussian component N(mean, stdev^2 I). stdev 0 is a point mass.
struct MixtureComponent {
    Vector mean;
    double stdev = 1.0;
    double weight = 1.0;
};

/// Weighted isotropic Gaussian mixture standing in for a text-conditioned data distribution.
struct MixtureSpec {
    std::size_t dim = 0;
    std::vector<MixtureComponent> components;

    /// Throws InvalidArgument unless: at least one component, means have length dim,
    /// stdev >= 0, weights > 0 and summing to 1 within 1e-9.
    void validate() const;

    Vector mean() const;
    double density(std::span<const double> x) const;
};

/// Per-component posterior weights of the time-t marginal
/// p_t(x) = sum_j w_j N(x; t mu_j, (t^2 sigma_j^2 + (1-t)^2) I).
Vector responsibilities(std::span<const double> x, double t, const MixtureSpec& spec);

/// Exact marginal velocity E[y - z | x_t = x] of the linear path x_t = t y + (1 - t) z,
/// y ~ spec, z ~ N(0, I).
///
/// Conditioned on component j the pair (y - z, x_t) is jointly Gaussian, so
///     E[y - z | x_t = x, j] = b_j(t) mu_j + a_j(t) x,
///     a_j(t) = (t sigma_j^2 - (1 - t)) / (t^2 sigma_j^2 + (1 - t)^2),   b_j(t) = 1 - t a_j(t),
/// and the marginal velocity is the responsibility-weighted sum over j.
/// Throws NumericFailure(step -1) when a component variance vanishes (t = 1, sigma_j = 0).
Vector mixture_velocity(std::span<const double> x, double t, const MixtureSpec& spec);

/// exp(-min_j |x - mu_j|^2 / (2 tau^2)); 1 exactly at a component mean.
double layout_similarity(std::span<const double> x, const MixtureSpec& spec, double tau = 1.0);

}  // namespace pgraft
