#include "smrl/features.hpp"

#include <cmath>
#include <numbers>

#include "smrl/errors.hpp"

namespace smrl {

ScaledIdentityFeatures::ScaledIdentityFeatures(int state_dim, double scale)
    : dim_(state_dim), scale_(scale) {
    if (state_dim < 1) throw ArgumentError("scaled-identity features: state_dim must be >= 1");
}

Vec ScaledIdentityFeatures::value(const Vec& s) const { return scale_ * s; }

Vec ScaledIdentityFeatures::partial(int i, const Vec&) const {
    Vec d = Vec::Zero(dim_);
    d(i) = scale_;
    return d;
}

Vec ScaledIdentityFeatures::partial2(int, const Vec&) const { return Vec::Zero(dim_); }

PolynomialFeatures::PolynomialFeatures(int degree) : degree_(degree) {
    if (degree < 1) throw ArgumentError("polynomial features: degree must be >= 1");
}

Vec PolynomialFeatures::value(const Vec& s) const {
    Vec v(degree_);
    double p = s(0);
    for (int k = 0; k < degree_; ++k) {
        v(k) = p;
        p *= s(0);
    }
    return v;
}

Vec PolynomialFeatures::partial(int, const Vec& s) const {
    // d/ds s^(k+1) = (k+1) s^k
    Vec v(degree_);
    double p = 1.0;
    for (int k = 0; k < degree_; ++k) {
        v(k) = (k + 1) * p;
        p *= s(0);
    }
    return v;
}

Vec PolynomialFeatures::partial2(int, const Vec& s) const {
    Vec v = Vec::Zero(degree_);
    double p = 1.0;
    for (int k = 1; k < degree_; ++k) {
        v(k) = (k + 1) * k * p;
        p *= s(0);
    }
    return v;
}

GaussianBase::GaussianBase(int state_dim, double sigma) : dim_(state_dim), sigma_(sigma) {
    if (!(sigma > 0.0)) throw ArgumentError("gaussian base measure: sigma must be > 0");
}

double GaussianBase::log_q(const Vec& s) const {
    const double var = sigma_ * sigma_;
    return -0.5 * dim_ * std::log(2.0 * std::numbers::pi * var) - 0.5 * s.squaredNorm() / var;
}

double GaussianBase::dlog_q(int i, const Vec& s) const { return -s(i) / (sigma_ * sigma_); }

double GaussianBase::d2log_q(int, const Vec&) const { return -1.0 / (sigma_ * sigma_); }

FlatBase::FlatBase(int state_dim, double log_const) : dim_(state_dim), log_const_(log_const) {}

LinearActionFeatures::LinearActionFeatures(int state_dim, int action_dim)
    : ds_(state_dim), da_(action_dim) {}

Vec LinearActionFeatures::value(const Vec& s, const Vec& a) const {
    Vec v(ds_ + da_);
    v << s, a;
    return v;
}

namespace {
double max_action_norm2(const std::vector<Vec>& actions) {
    double m = 0.0;
    for (const auto& a : actions) m = std::max(m, a.squaredNorm());
    return m;
}
}  // namespace

double LinearActionFeatures::bound(const Box& domain, const std::vector<Vec>& actions) const {
    const double s = domain.max_norm();
    return std::sqrt(s * s + max_action_norm2(actions));
}

SumActionFeatures::SumActionFeatures(int state_dim) : ds_(state_dim) {}

Vec SumActionFeatures::value(const Vec& s, const Vec& a) const { return s + a; }

double SumActionFeatures::bound(const Box& domain, const std::vector<Vec>& actions) const {
    return domain.max_norm() + std::sqrt(max_action_norm2(actions));
}

TanhActionFeatures::TanhActionFeatures(int state_dim, int action_dim)
    : ds_(state_dim), da_(action_dim) {}

Vec TanhActionFeatures::value(const Vec& s, const Vec& a) const {
    Vec v(ds_ + da_);
    v << s.array().tanh().matrix(), a;
    return v;
}

double TanhActionFeatures::bound(const Box& domain, const std::vector<Vec>& actions) const {
    double t = 0.0;
    for (int i = 0; i < ds_; ++i) {
        const double m = std::max(std::abs(domain.lo(i)), std::abs(domain.hi(i)));
        t += std::tanh(m) * std::tanh(m);
    }
    return std::sqrt(t + max_action_norm2(actions));
}

FunctionActionFeatures::FunctionActionFeatures(int state_dim, int action_dim, int dim, Fn fn,
                                               double declared_bound, std::string name)
    : ds_(state_dim),
      da_(action_dim),
      dim_(dim),
      fn_(std::move(fn)),
      bound_(declared_bound),
      name_(std::move(name)) {}

std::shared_ptr<const ActionFeatures> make_action_features(const std::string& preset,
                                                           int state_dim, int action_dim) {
    if (preset == "linear") return std::make_shared<LinearActionFeatures>(state_dim, action_dim);
    if (preset == "tanh") return std::make_shared<TanhActionFeatures>(state_dim, action_dim);
    if (preset == "sum") {
        if (action_dim != state_dim)
            throw ConfigError("phi preset 'sum' needs action_dim == state_dim");
        return std::make_shared<SumActionFeatures>(state_dim);
    }
    throw ConfigError("unknown phi preset '" + preset + "' (expected linear, tanh or sum)");
}

}  // namespace smrl
