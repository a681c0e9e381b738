#include "smrl/score_matching.hpp"

#include <cmath>

#include "smrl/errors.hpp"
#include "smrl/kernels.hpp"
#include "smrl/quadrature.hpp"

namespace smrl {

Mat kron_phi(const Vec& phi, int d_psi) {
    const int dp = static_cast<int>(phi.size());
    Mat out = Mat::Zero(static_cast<Eigen::Index>(d_psi) * dp, d_psi);
    for (int j = 0; j < dp; ++j)
        for (int i = 0; i < d_psi; ++i) out(i + j * d_psi, i) = phi(j);
    return out;
}

ScoreFeatures score_features(const ExpFamilyModel& model, const Vec& s, int a, const Vec& s_next) {
    const int ds = model.state_dim();
    const int dpsi = model.psi_dim();
    if (s_next.size() != ds) throw ShapeError("score_features: s_next has wrong dimension");

    ScoreFeatures f;
    f.phi = model.features(s, a);
    f.dpsi.resize(dpsi, ds);
    f.C = Mat::Zero(dpsi, dpsi);
    f.xi = Vec::Zero(dpsi);
    for (int i = 0; i < ds; ++i) {
        const Vec d1 = model.psi->partial(i, s_next);
        const Vec d2 = model.psi->partial2(i, s_next);
        const double g = model.base->dlog_q(i, s_next);
        const double g2 = model.base->d2log_q(i, s_next);
        if (!d1.allFinite() || !d2.allFinite())
            throw DomainError("non-finite partial from psi map '" + model.psi->name() + "'");
        if (!std::isfinite(g) || !std::isfinite(g2))
            throw DomainError("non-finite partial from base measure '" + model.base->name() + "'");
        f.dpsi.col(i) = d1;
        f.C.noalias() += d1 * d1.transpose();
        f.xi += g * d1 + d2;
        f.const_term += 0.5 * (g * g + 2.0 * g2);
    }
    f.Phi = kron_phi(f.phi, dpsi);
    return f;
}

SuffStats::SuffStats(int d_psi, int d_phi)
    : d_psi_(d_psi),
      d_phi_(d_phi),
      V_(Mat::Zero(static_cast<Eigen::Index>(d_psi) * d_phi,
                   static_cast<Eigen::Index>(d_psi) * d_phi)),
      b_(Vec::Zero(static_cast<Eigen::Index>(d_psi) * d_phi)) {
    if (d_psi < 1 || d_phi < 1) throw ArgumentError("SuffStats: dimensions must be >= 1");
}

void SuffStats::accumulate(const ScoreFeatures& f) {
    if (f.phi.size() != d_phi_ || f.dpsi.rows() != d_psi_ || f.xi.size() != d_psi_)
        throw ShapeError("SuffStats::accumulate: feature dimensions do not match the statistics");
    const Eigen::Index d = dim();
    Vec x(d);
    for (Eigen::Index i = 0; i < f.dpsi.cols(); ++i) {
        // x = vec(d_i psi phi^T) = phi (x) d_i psi
        for (int j = 0; j < d_phi_; ++j) x.segment(j * d_psi_, d_psi_) = f.phi(j) * f.dpsi.col(i);
        kernels::syr(1.0, std::span<const double>(x.data(), d),
                     std::span<double>(V_.data(), static_cast<std::size_t>(d * d)));
    }
    for (int j = 0; j < d_phi_; ++j) b_.segment(j * d_psi_, d_psi_) += f.phi(j) * f.xi;
    const_ += f.const_term;
    ++n_;
}

SuffStats accumulate(SuffStats stats, const ScoreFeatures& f) {
    stats.accumulate(f);
    return stats;
}

SuffStats accumulate_dataset(const ExpFamilyModel& model, std::span<const Transition> data) {
    SuffStats stats(model.psi_dim(), model.phi_dim());
    for (const auto& t : data) stats.accumulate(score_features(model, t.s, t.a, t.s_next));
    return stats;
}

namespace {
double condition_estimate(const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
    const Vec ev = es.eigenvalues().cwiseAbs();
    return ev.minCoeff() > 0.0 ? ev.maxCoeff() / ev.minCoeff()
                               : std::numeric_limits<double>::infinity();
}
}  // namespace

Estimate solve_estimator(const SuffStats& stats, double lambda) {
    if (!(lambda > 0.0)) throw ArgumentError("solve_estimator: lambda must be > 0");
    const Eigen::Index d = stats.dim();
    Mat gram = stats.V_hat();
    gram.diagonal().array() += lambda;

    Estimate est;
    est.lambda = lambda;
    est.gram.compute(gram);
    if (est.gram.info() != Eigen::Success) {
        est.jitter = 1e-10 * gram.trace() / static_cast<double>(d);
        Mat jittered = gram;
        jittered.diagonal().array() += est.jitter;
        est.gram.compute(jittered);
        if (est.gram.info() != Eigen::Success)
            throw NumericalError("Cholesky of V + lambda I failed after jitter",
                                 condition_estimate(gram));
    }
    const Vec w = -est.gram.solve(stats.b_hat());
    est.W_hat = unvec(w, stats.d_psi(), stats.d_phi());
    est.residual_norm = (gram * w + stats.b_hat()).norm();
    return est;
}

double quadratic_form_loss(const SuffStats& stats, const Mat& w) {
    const Vec v = vec(w);
    return 0.5 * v.dot(stats.V_hat() * v) + v.dot(stats.b_hat()) + stats.const_term();
}

double empirical_loss_direct(const ExpFamilyModel& model, std::span<const Transition> data,
                             const Mat& w) {
    double total = 0.0;
    for (const auto& t : data) {
        const Vec eta = w * model.features(t.s, t.a);
        for (int i = 0; i < model.state_dim(); ++i) {
            // d_i log P_W = d_i log q + d_i psi^T W phi, likewise for the second partial.
            const double g = model.base->dlog_q(i, t.s_next) +
                             model.psi->partial(i, t.s_next).dot(eta);
            const double g2 = model.base->d2log_q(i, t.s_next) +
                              model.psi->partial2(i, t.s_next).dot(eta);
            if (!std::isfinite(g) || !std::isfinite(g2))
                throw DomainError("non-finite log-density partial in empirical loss");
            total += 0.5 * (g * g + 2.0 * g2);
        }
    }
    return total;
}

FisherDivergence fisher_divergence_quadrature(const ExpFamilyModel& model, const Mat& w,
                                              const Vec& s, int a, int grid_resolution) {
    if (model.state_dim() != 1)
        throw UnsupportedDimension("fisher_divergence_quadrature: d_s must be 1");
    const GridDensity p0 = grid_density(model, model.W, s, a, grid_resolution);

    FisherDivergence out;
    out.direct = 0.5 * p0.expect([&](const Vec& x) {
        return (score(model, model.W, s, a, x) - score(model, w, s, a, x)).squaredNorm();
    });

    const Vec phi = model.features(s, a);
    const int dpsi = model.psi_dim();
    const Eigen::Index d = model.param_dim();
    out.V_bar = Mat::Zero(d, d);
    Vec x(d);
    for (std::size_t k = 0; k < p0.mass.size(); ++k) {
        for (int i = 0; i < model.state_dim(); ++i) {
            const Vec dpsi_i = model.psi->partial(i, p0.rule.nodes[k]);
            for (Eigen::Index j = 0; j < phi.size(); ++j)
                x.segment(j * dpsi, dpsi) = phi(j) * dpsi_i;
            kernels::syr(p0.mass[k], std::span<const double>(x.data(), d),
                         std::span<double>(out.V_bar.data(), static_cast<std::size_t>(d * d)));
        }
    }
    const Vec diff = vec(w - model.W);
    out.quadratic_form = 0.5 * diff.dot(out.V_bar * diff);
    return out;
}

}  // namespace smrl
