#pragma once
// Trapezoid-rule oracles over the (bounded, d_s <= 2) state domain. These
// back the verification checks: log-partition values, normalized densities,
// population expectations, inverse-CDF sampling for generic 1-D models.

#include <functional>
#include <vector>

#include "smrl/model.hpp"

namespace smrl {

struct QuadratureRule {
    std::vector<Vec> nodes;
    std::vector<double> weights;
};

// Tensor trapezoid rule with `intervals` sub-intervals per axis.
QuadratureRule trapezoid_rule(const Box& domain, int intervals);

// P_W(. | s, a) discretized on a quadrature rule: mass[k] = w_k p(node_k),
// normalized to sum to one.
struct GridDensity {
    QuadratureRule rule;
    std::vector<double> mass;
    double log_partition = 0.0;

    double expect(const std::function<double(const Vec&)>& f) const;
    Vec expect_vec(const std::function<Vec(const Vec&)>& f) const;
};

GridDensity grid_density(const ExpFamilyModel& model, const Mat& w, const Vec& s, int a,
                         int intervals);

// log of the trapezoid integral of q(s') exp<psi(s'), W phi(s, a)> over the domain.
double log_partition_quadrature(const ExpFamilyModel& model, const Vec& s, int a,
                                int grid_resolution);

// Inverse-CDF draw from P_W(. | s, a) on a one-dimensional domain, using the
// piecewise-linear density interpolant on a trapezoid grid.
double sample_inverse_cdf_1d(const GridDensity& density, Rng& rng);

}  // namespace smrl
