#include "smrl/model.hpp"

#include <algorithm>
#include <cmath>

#include "smrl/errors.hpp"

namespace smrl {

Box::Box(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size()) throw ShapeError("box: lo/hi dimension mismatch");
    for (Eigen::Index i = 0; i < lo.size(); ++i)
        if (!(lo(i) < hi(i))) throw ArgumentError("box: require lo < hi on every axis");
}

Box Box::cube(int dim, double lo, double hi) {
    return Box(Vec::Constant(dim, lo), Vec::Constant(dim, hi));
}

bool Box::contains(const Vec& s) const {
    if (s.size() != lo.size()) return false;
    return (s.array() >= lo.array()).all() && (s.array() <= hi.array()).all();
}

Vec Box::clip(const Vec& s) const { return s.cwiseMax(lo).cwiseMin(hi); }

double Box::max_norm() const {
    double t = 0.0;
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        const double m = std::max(std::abs(lo(i)), std::abs(hi(i)));
        t += m * m;
    }
    return std::sqrt(t);
}

bool all_finite(const Vec& v) { return v.allFinite(); }

Vec standard_normal(Rng& rng, Eigen::Index n) {
    std::normal_distribution<double> z;
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = z(rng);
    return v;
}

Vec unit_sphere(Rng& rng, Eigen::Index n) {
    for (;;) {
        Vec v = standard_normal(rng, n);
        const double norm = v.norm();
        if (norm > 1e-300) return v / norm;
    }
}

Vec ExpFamilyModel::features(const Vec& s, int a) const {
    Vec f = phi->value(s, actions.at(static_cast<std::size_t>(a)));
    if (!f.allFinite()) throw DomainError("non-finite value from phi map '" + phi->name() + "'");
    return f;
}

ExpFamilyModel ExpFamilyModel::with_parameter(Mat w) const {
    ExpFamilyModel m = *this;
    m.W = std::move(w);
    return m;
}

void ExpFamilyModel::validate() const {
    if (!psi || !base || !phi) throw ArgumentError("model: psi, q and phi must all be set");
    const int ds = psi->state_dim();
    if (base->state_dim() != ds || phi->state_dim() != ds || domain.dim() != ds)
        throw ShapeError("model: state dimension disagrees between psi, q, phi and domain");
    if (W.rows() != psi->dim() || W.cols() != phi->dim())
        throw ShapeError("model: W must be d_psi x d_phi");
    if (actions.empty()) throw ArgumentError("model: action set is empty");
    for (const auto& a : actions)
        if (a.size() != phi->action_dim()) throw ShapeError("model: action vector dimension");
    if (family == Family::Gaussian && !(sigma > 0.0))
        throw ArgumentError("model: gaussian family needs sigma > 0");
}

ExpFamilyModel make_gaussian_model(Mat w0, double sigma, Box clip_box, std::vector<Vec> actions,
                                   std::shared_ptr<const ActionFeatures> phi) {
    if (!(sigma > 0.0)) throw ArgumentError("gaussian model: sigma must be > 0");
    const int ds = clip_box.dim();
    ExpFamilyModel m;
    m.psi = std::make_shared<ScaledIdentityFeatures>(ds, 1.0 / (sigma * sigma));
    m.base = std::make_shared<GaussianBase>(ds, sigma);
    m.phi = std::move(phi);
    m.W = std::move(w0);
    m.domain = std::move(clip_box);
    m.actions = std::move(actions);
    m.family = Family::Gaussian;
    m.sigma = sigma;
    m.validate();
    return m;
}

ExpFamilyModel make_polynomial_model(int degree, double base_sigma, Mat w, Box domain,
                                     std::vector<Vec> actions,
                                     std::shared_ptr<const ActionFeatures> phi) {
    if (domain.dim() != 1) throw UnsupportedDimension("polynomial model: d_s must be 1");
    ExpFamilyModel m;
    m.psi = std::make_shared<PolynomialFeatures>(degree);
    m.base = std::make_shared<GaussianBase>(1, base_sigma);
    m.phi = std::move(phi);
    m.W = std::move(w);
    m.domain = std::move(domain);
    m.actions = std::move(actions);
    m.family = Family::Generic;
    m.validate();
    return m;
}

double log_unnormalized_density(const ExpFamilyModel& model, const Vec& s, int a,
                                const Vec& s_next) {
    const Vec psi = model.psi->value(s_next);
    if (!psi.allFinite())
        throw DomainError("non-finite value from psi map '" + model.psi->name() + "'");
    const double lq = model.base->log_q(s_next);
    if (!std::isfinite(lq))
        throw DomainError("non-finite value from base measure '" + model.base->name() + "'");
    return lq + psi.dot(model.W * model.features(s, a));
}

Vec score(const ExpFamilyModel& model, const Mat& w, const Vec& s, int a, const Vec& s_next) {
    const Vec mean_param = w * model.features(s, a);
    const int ds = model.state_dim();
    Vec g(ds);
    for (int i = 0; i < ds; ++i)
        g(i) = model.base->dlog_q(i, s_next) + model.psi->partial(i, s_next).dot(mean_param);
    if (!g.allFinite()) throw DomainError("non-finite score from psi map '" + model.psi->name() + "'");
    return g;
}

double RewardFn::operator()(const Vec& s, const Vec& a) const {
    if (preset == "zero") return 0.0;
    const double r = 1.0 - (s - target).squaredNorm() / scale - action_cost * a.squaredNorm();
    return std::clamp(r, 0.0, 1.0);
}

RewardFn RewardFn::quadratic_target(Vec target, double scale, double action_cost) {
    if (!(scale > 0.0)) throw ArgumentError("reward: scale must be > 0");
    if (action_cost < 0.0) throw ArgumentError("reward: action_cost must be >= 0");
    RewardFn r;
    r.target = std::move(target);
    r.scale = scale;
    r.action_cost = action_cost;
    return r;
}

RewardFn RewardFn::zero(int state_dim) {
    RewardFn r;
    r.preset = "zero";
    r.target = Vec::Zero(state_dim);
    return r;
}

ExpFamilyModel NonLdsInstance::as_model() const {
    return make_gaussian_model(W0, sigma, clip_box, actions, phi);
}

TransitionDraw draw_transition(const NonLdsInstance& inst, const Vec& s, int a, Rng& rng) {
    const Vec mu = inst.mean(s, a);
    TransitionDraw d;
    d.raw = mu + inst.sigma * standard_normal(rng, mu.size());
    d.clipped = inst.clip_box.clip(d.raw);
    return d;
}

}  // namespace smrl
