#include "smrl/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smrl/errors.hpp"
#include "smrl/kernels.hpp"

namespace smrl {

QuadratureRule trapezoid_rule(const Box& domain, int intervals) {
    const int d = domain.dim();
    if (d < 1 || d > 2)
        throw UnsupportedDimension("quadrature oracle supports d_s <= 2, got d_s = " +
                                   std::to_string(d));
    if (intervals < 1) throw ArgumentError("quadrature: need at least one interval");

    std::vector<std::vector<double>> axis_nodes(d), axis_weights(d);
    for (int k = 0; k < d; ++k) {
        const double h = (domain.hi(k) - domain.lo(k)) / intervals;
        axis_nodes[k].resize(intervals + 1);
        axis_weights[k].assign(intervals + 1, h);
        for (int j = 0; j <= intervals; ++j) axis_nodes[k][j] = domain.lo(k) + j * h;
        axis_nodes[k].back() = domain.hi(k);
        axis_weights[k].front() *= 0.5;
        axis_weights[k].back() *= 0.5;
    }

    QuadratureRule rule;
    if (d == 1) {
        for (int j = 0; j <= intervals; ++j) {
            rule.nodes.push_back(Vec::Constant(1, axis_nodes[0][j]));
            rule.weights.push_back(axis_weights[0][j]);
        }
    } else {
        for (int j0 = 0; j0 <= intervals; ++j0)
            for (int j1 = 0; j1 <= intervals; ++j1) {
                Vec x(2);
                x << axis_nodes[0][j0], axis_nodes[1][j1];
                rule.nodes.push_back(std::move(x));
                rule.weights.push_back(axis_weights[0][j0] * axis_weights[1][j1]);
            }
    }
    return rule;
}

double GridDensity::expect(const std::function<double(const Vec&)>& f) const {
    std::vector<double> vals(mass.size());
    for (std::size_t k = 0; k < mass.size(); ++k) vals[k] = f(rule.nodes[k]);
    return kernels::dot(mass, vals);
}

Vec GridDensity::expect_vec(const std::function<Vec(const Vec&)>& f) const {
    Vec acc;
    for (std::size_t k = 0; k < mass.size(); ++k) {
        const Vec v = f(rule.nodes[k]);
        if (k == 0) acc = Vec::Zero(v.size());
        kernels::axpy(mass[k], std::span<const double>(v.data(), v.size()),
                      std::span<double>(acc.data(), acc.size()));
    }
    return acc;
}

GridDensity grid_density(const ExpFamilyModel& model, const Mat& w, const Vec& s, int a,
                         int intervals) {
    GridDensity g;
    g.rule = trapezoid_rule(model.domain, intervals);
    const Vec eta = w * model.features(s, a);
    const std::size_t n = g.rule.nodes.size();

    std::vector<double> logf(n);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const Vec& x = g.rule.nodes[k];
        const Vec psi = model.psi->value(x);
        logf[k] = model.base->log_q(x) + psi.dot(eta);
        if (std::isnan(logf[k]) || logf[k] == std::numeric_limits<double>::infinity())
            throw DomainError("unnormalizable density on quadrature grid (psi map '" +
                              model.psi->name() + "')");
        top = std::max(top, logf[k]);
    }
    if (!std::isfinite(top)) throw DomainError("density vanishes on the whole quadrature grid");

    g.mass.resize(n);
    for (std::size_t k = 0; k < n; ++k) g.mass[k] = std::exp(logf[k] - top);
    const double total = kernels::dot(g.mass, g.rule.weights);
    if (!(total > 0.0) || !std::isfinite(total))
        throw DomainError("unnormalizable density on quadrature grid");
    g.log_partition = top + std::log(total);
    for (std::size_t k = 0; k < n; ++k) g.mass[k] *= g.rule.weights[k] / total;
    return g;
}

double log_partition_quadrature(const ExpFamilyModel& model, const Vec& s, int a,
                                int grid_resolution) {
    return grid_density(model, model.W, s, a, grid_resolution).log_partition;
}

double sample_inverse_cdf_1d(const GridDensity& density, Rng& rng) {
    const auto& nodes = density.rule.nodes;
    const std::size_t n = nodes.size();
    if (n < 2 || nodes[0].size() != 1)
        throw UnsupportedDimension("inverse-CDF sampling needs a one-dimensional grid");

    // Recover normalized node densities, then integrate the linear interpolant.
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = density.mass[k] / density.rule.weights[k];
    std::vector<double> cdf(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        const double h = nodes[k](0) - nodes[k - 1](0);
        cdf[k] = cdf[k - 1] + 0.5 * h * (p[k - 1] + p[k]);
    }
    std::uniform_real_distribution<double> unif(0.0, cdf.back());
    const double u = unif(rng);
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t j = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::distance(cdf.begin(), it)), 1, n - 1);

    // Within [x0, x1] the density is p0 + (p1 - p0) t / h; solve the quadratic for t.
    const double x0 = nodes[j - 1](0);
    const double h = nodes[j](0) - x0;
    const double p0 = p[j - 1], p1 = p[j];
    const double target = u - cdf[j - 1];
    const double slope = (p1 - p0) / h;
    const double disc = std::max(0.0, p0 * p0 + 2.0 * slope * target);
    const double denom = p0 + std::sqrt(disc);
    const double t = denom > 0.0 ? 2.0 * target / denom : 0.5 * h;
    return x0 + std::clamp(t, 0.0, h);
}

}  // namespace smrl
