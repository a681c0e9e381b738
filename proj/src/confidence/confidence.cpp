#include "smrl/confidence.hpp"

#include <algorithm>
#include <cmath>

#include "smrl/errors.hpp"
#include "smrl/quadrature.hpp"

namespace smrl {

void StructuralConstants::validate() const {
    if (!(alpha1 > 0.0)) throw ArgumentError("constants: alpha1 must be > 0");
    if (alpha1 > alpha2) throw ArgumentError("constants: need alpha1 <= alpha2");
    if (B_psi < 0.0 || B_c < 0.0) throw ArgumentError("constants: B_psi and B_c must be >= 0");
    if (!(kappa > 0.0)) throw ArgumentError("constants: kappa must be > 0");
    if (B_star < 0.0) throw ArgumentError("constants: B_star must be >= 0");
}

StructuralConstants StructuralConstants::nonlds(double sigma, double B_star) {
    if (!(sigma > 0.0)) throw ArgumentError("constants: sigma must be > 0");
    StructuralConstants c;
    const double s2 = sigma * sigma;
    c.B_psi = 1.0 / (s2 * s2 * s2);
    c.B_c = 0.0;
    c.alpha1 = c.alpha2 = 1.0 / (s2 * s2);
    c.kappa = 1.0 / s2;
    c.B_star = B_star;
    return c;
}

WidthScaling parse_width_scaling(const std::string& s) {
    if (s == "alpha1^2" || s == "alpha_squared") return WidthScaling::AlphaSquared;
    if (s == "alpha1" || s == "alpha") return WidthScaling::Alpha;
    throw ConfigError("unknown beta_scaling '" + s + "' (expected alpha1^2 or alpha1)");
}

std::string to_string(WidthScaling s) {
    return s == WidthScaling::AlphaSquared ? "alpha1^2" : "alpha1";
}

double information_gain(const Mat& V, double lambda) {
    if (!(lambda > 0.0)) throw ArgumentError("information_gain: lambda must be > 0");
    Mat m = V / lambda;
    m.diagonal().array() += 1.0;
    Eigen::LLT<Mat> llt(m);
    if (llt.info() != Eigen::Success)
        throw NumericalError("information_gain: V / lambda + I is not positive definite");
    const Mat& L = llt.matrixLLT();
    double g = 0.0;
    for (Eigen::Index i = 0; i < L.rows(); ++i) g += 2.0 * std::log(L(i, i));
    return std::max(0.0, g);
}

double information_gain(const SuffStats& stats, double lambda) {
    return information_gain(stats.V_hat(), lambda);
}

double beta_from_gain(double gamma, const StructuralConstants& consts, double lambda,
                      double delta, WidthScaling scaling) {
    if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("beta: delta must lie in (0, 1)");
    if (!(lambda > 0.0)) throw ArgumentError("beta: lambda must be > 0");
    const double a = scaling == WidthScaling::AlphaSquared ? consts.alpha1 * consts.alpha1
                                                           : consts.alpha1;
    const double c = std::sqrt(2.0 * (consts.B_psi + consts.B_c) / a);
    return c * std::sqrt(0.5 * gamma + std::log(1.0 / delta)) + std::sqrt(lambda) * consts.B_star;
}

double beta_width(const SuffStats& stats, const StructuralConstants& consts, double lambda,
                  double delta, WidthScaling scaling) {
    if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("beta: delta must lie in (0, 1)");
    return beta_from_gain(information_gain(stats, lambda), consts, lambda, delta, scaling);
}

ConfidenceSet ConfidenceSet::build(const Estimate& est, const SuffStats& stats, double beta,
                                   double delta) {
    if (!(beta >= 0.0)) throw ArgumentError("confidence set: beta must be >= 0");
    ConfidenceSet c;
    c.center_ = est.W_hat;
    c.gram_ = stats.V_hat();
    c.gram_.diagonal().array() += est.lambda + est.jitter;
    c.factor_ = est.gram;
    c.beta_ = beta;
    c.lambda_ = est.lambda;
    c.delta_ = delta;
    return c;
}

ConfidenceSet ConfidenceSet::ball(Mat center, double radius) {
    if (!(radius >= 0.0)) throw ArgumentError("confidence set: radius must be >= 0");
    ConfidenceSet c;
    const Eigen::Index d = center.size();
    c.center_ = std::move(center);
    c.gram_ = Mat::Identity(d, d);
    c.factor_.compute(c.gram_);
    c.beta_ = radius;
    c.lambda_ = 1.0;
    return c;
}

ConfidenceSet ConfidenceSet::singleton(Mat w) { return ball(std::move(w), 0.0); }

double ConfidenceSet::distance(const Mat& w) const {
    if (w.rows() != center_.rows() || w.cols() != center_.cols())
        throw ShapeError("confidence set: parameter shape mismatch");
    const Vec diff = vec(center_ - w);
    // ||x||_G = ||L^T x|| for G = L L^T.
    return (factor_.matrixU() * diff).norm();
}

double ConfidenceSet::distance_direct(const Mat& w) const {
    if (w.rows() != center_.rows() || w.cols() != center_.cols())
        throw ShapeError("confidence set: parameter shape mismatch");
    const Vec diff = vec(center_ - w);
    return std::sqrt(std::max(0.0, diff.dot(gram_ * diff)));
}

Mat ConfidenceSet::boundary_point(const Vec& u) const {
    if (u.size() != gram_.rows()) throw ShapeError("confidence set: direction has wrong size");
    const Vec x = factor_.matrixU().solve(u);
    const Vec w = vec(center_) + (beta_ * (1.0 - 1e-12)) * x;
    return unvec(w, center_.rows(), center_.cols());
}

namespace {

struct LogDensityGrid {
    GridDensity grid;
    std::vector<double> log_p;
};

LogDensityGrid log_density_grid(const ExpFamilyModel& model, const Mat& w, const Vec& s, int a,
                                int res) {
    LogDensityGrid out;
    out.grid = grid_density(model, w, s, a, res);
    const Vec eta = w * model.features(s, a);
    out.log_p.resize(out.grid.rule.nodes.size());
    for (std::size_t k = 0; k < out.log_p.size(); ++k) {
        const Vec& x = out.grid.rule.nodes[k];
        out.log_p[k] = model.base->log_q(x) + model.psi->value(x).dot(eta) - out.grid.log_partition;
    }
    return out;
}

}  // namespace

KlCheck kl_bound_check(const StructuralConstants& consts, const ExpFamilyModel& model,
                       const Mat& w, const Mat& w_prime, const Vec& s, int a,
                       int grid_resolution) {
    const Vec phi = model.features(s, a);
    const Vec diff = (w - w_prime) * phi;
    KlCheck out;
    out.bound = 0.5 * consts.kappa * diff.squaredNorm();
    if (model.family == Family::Gaussian) {
        out.kl = diff.squaredNorm() / (2.0 * model.sigma * model.sigma);
        return out;
    }
    if (model.state_dim() != 1)
        throw UnsupportedDimension("kl_bound_check: quadrature KL needs d_s = 1");
    const LogDensityGrid p = log_density_grid(model, w, s, a, grid_resolution);
    const LogDensityGrid q = log_density_grid(model, w_prime, s, a, grid_resolution);
    double kl = 0.0;
    for (std::size_t k = 0; k < p.log_p.size(); ++k)
        if (p.grid.mass[k] > 0.0) kl += p.grid.mass[k] * (p.log_p[k] - q.log_p[k]);
    out.kl = std::max(0.0, kl);
    return out;
}

double psi_covariance_max_eig(const ExpFamilyModel& model, const Mat& w, const Vec& s, int a,
                              int grid_resolution) {
    const GridDensity g = grid_density(model, w, s, a, grid_resolution);
    const int d = model.psi_dim();
    Vec mean = Vec::Zero(d);
    Mat second = Mat::Zero(d, d);
    for (std::size_t k = 0; k < g.mass.size(); ++k) {
        const Vec psi = model.psi->value(g.rule.nodes[k]);
        mean += g.mass[k] * psi;
        second.noalias() += g.mass[k] * psi * psi.transpose();
    }
    const Mat cov = second - mean * mean.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(cov, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

CalibrationReport calibrate_constants(const ExpFamilyModel& model,
                                      const StructuralConstants& given,
                                      const std::vector<Mat>& parameters,
                                      const std::vector<std::pair<Vec, int>>& state_actions,
                                      int grid_resolution, int segment_points) {
    CalibrationReport rep;
    rep.constants = given;

    const QuadratureRule rule = trapezoid_rule(model.domain, grid_resolution);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const Vec& x : rule.nodes) {
        Mat C = Mat::Zero(model.psi_dim(), model.psi_dim());
        for (int i = 0; i < model.state_dim(); ++i) {
            const Vec d1 = model.psi->partial(i, x);
            C.noalias() += d1 * d1.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(C, Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues().minCoeff());
        hi = std::max(hi, es.eigenvalues().maxCoeff());
    }
    rep.constants.alpha1 = lo;
    rep.constants.alpha2 = hi;
    if (!(lo > 1e-12))
        rep.warnings.push_back("C(s') is singular somewhere on the domain (min eigenvalue " +
                               std::to_string(lo) + "); alpha1 > 0 fails");
    if (lo < given.alpha1)
        rep.warnings.push_back("scanned alpha1 " + std::to_string(lo) +
                               " is below the configured " + std::to_string(given.alpha1));
    if (hi > given.alpha2)
        rep.warnings.push_back("scanned alpha2 " + std::to_string(hi) +
                               " is above the configured " + std::to_string(given.alpha2));

    double kappa = 0.0;
    const int pts = std::max(2, segment_points);
    for (const Mat& p : parameters)
        for (const auto& [s, a] : state_actions)
            for (int j = 0; j < pts; ++j) {
                const double t = static_cast<double>(j) / (pts - 1);
                const Mat wt = model.W + t * (p - model.W);
                kappa = std::max(kappa, psi_covariance_max_eig(model, wt, s, a, grid_resolution));
            }
    if (kappa > 0.0) {
        rep.constants.kappa = kappa;
        if (kappa > given.kappa)
            rep.warnings.push_back("scanned kappa " + std::to_string(kappa) +
                                   " is above the configured " + std::to_string(given.kappa));
    }
    return rep;
}

}  // namespace smrl
