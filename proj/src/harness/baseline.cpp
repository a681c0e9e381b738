#include <cmath>

#include "smrl/errors.hpp"
#include "smrl/harness.hpp"

namespace smrl {

Mat mle_ridge_baseline(const ExpFamilyModel& model, std::span<const Transition> data,
                       double lambda_mle) {
    if (model.family != Family::Gaussian)
        throw ArgumentError("ridge baseline: needs the Gaussian model");
    if (lambda_mle < 0.0) throw ArgumentError("ridge baseline: lambda must be >= 0");
    const int ds = model.state_dim(), dphi = model.phi_dim();
    Mat A = Mat::Zero(ds, dphi);
    Mat G = Mat::Zero(dphi, dphi);
    for (const auto& t : data) {
        const Vec phi = model.features(t.s, t.a);
        A.noalias() += t.s_next * phi.transpose();
        G.noalias() += phi * phi.transpose();
    }
    G.diagonal().array() += 0.5 * lambda_mle;
    // W G = A  <=>  G W^T = A^T (G symmetric).
    Eigen::LDLT<Mat> ldlt(G);
    const Vec d = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-14 * std::max(1.0, d.maxCoeff()))
        throw NumericalError("ridge baseline: singular design",
                             d.minCoeff() > 0 ? d.maxCoeff() / d.minCoeff()
                                              : std::numeric_limits<double>::infinity());
    return ldlt.solve(A.transpose()).transpose();
}

double matched_sm_lambda(double lambda_mle, double sigma) {
    return lambda_mle / (2.0 * std::pow(sigma, 4));
}

TvCheck tv_bound_check(const std::function<double(const Vec&)>& f, const GridDensity& p,
                       const GridDensity& q) {
    if (p.mass.size() != q.mass.size()) throw ShapeError("tv check: densities use different rules");
    TvCheck out;
    double diff = 0.0;
    for (std::size_t k = 0; k < p.mass.size(); ++k) {
        const double fk = f(p.rule.nodes[k]);
        if (!(fk >= 0.0 && fk <= 1.0)) throw ArgumentError("tv check: f must map into [0, 1]");
        diff += (p.mass[k] - q.mass[k]) * fk;
        out.rhs += 0.5 * std::abs(p.mass[k] - q.mass[k]);
    }
    out.lhs = std::abs(diff);
    return out;
}

}  // namespace smrl
