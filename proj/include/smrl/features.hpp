#pragma once
// Feature maps of a conditional exponential-family transition model:
//   P_W(s' | s, a) = q(s') exp(<psi(s'), W phi(s, a)> - Z_sa(W)).
// Derivatives are analytic; finite differences only appear in tests.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "smrl/types.hpp"

namespace smrl {

// psi : S -> R^{d_psi}, with per-coordinate first and second partials.
class StateFeatures {
   public:
    virtual ~StateFeatures() = default;
    virtual int state_dim() const = 0;
    virtual int dim() const = 0;
    virtual Vec value(const Vec& s) const = 0;
    // d/ds_i psi(s)
    virtual Vec partial(int i, const Vec& s) const = 0;
    // d^2/ds_i^2 psi(s)
    virtual Vec partial2(int i, const Vec& s) const = 0;
    virtual std::string name() const = 0;
};

// psi(s) = scale * s. The Gaussian model uses scale = sigma^-2.
class ScaledIdentityFeatures final : public StateFeatures {
   public:
    ScaledIdentityFeatures(int state_dim, double scale);
    int state_dim() const override { return dim_; }
    int dim() const override { return dim_; }
    Vec value(const Vec& s) const override;
    Vec partial(int i, const Vec& s) const override;
    Vec partial2(int i, const Vec& s) const override;
    std::string name() const override { return "scaled-identity"; }
    double scale() const { return scale_; }

   private:
    int dim_;
    double scale_;
};

// One-dimensional monomials psi(s) = (s, s^2, ..., s^degree).
class PolynomialFeatures final : public StateFeatures {
   public:
    explicit PolynomialFeatures(int degree);
    int state_dim() const override { return 1; }
    int dim() const override { return degree_; }
    Vec value(const Vec& s) const override;
    Vec partial(int i, const Vec& s) const override;
    Vec partial2(int i, const Vec& s) const override;
    std::string name() const override { return "polynomial"; }

   private:
    int degree_;
};

// Base measure q, handled through log q and its partials.
class BaseMeasure {
   public:
    virtual ~BaseMeasure() = default;
    virtual int state_dim() const = 0;
    virtual double log_q(const Vec& s) const = 0;
    virtual double dlog_q(int i, const Vec& s) const = 0;
    virtual double d2log_q(int i, const Vec& s) const = 0;
    virtual std::string name() const = 0;
};

// Normalized isotropic Gaussian N(0, sigma^2 I).
class GaussianBase final : public BaseMeasure {
   public:
    GaussianBase(int state_dim, double sigma);
    int state_dim() const override { return dim_; }
    double log_q(const Vec& s) const override;
    double dlog_q(int i, const Vec& s) const override;
    double d2log_q(int i, const Vec& s) const override;
    std::string name() const override { return "gaussian"; }
    double sigma() const { return sigma_; }

   private:
    int dim_;
    double sigma_;
};

// q = exp(log_const), constant on the domain.
class FlatBase final : public BaseMeasure {
   public:
    explicit FlatBase(int state_dim, double log_const = 0.0);
    int state_dim() const override { return dim_; }
    double log_q(const Vec&) const override { return log_const_; }
    double dlog_q(int, const Vec&) const override { return 0.0; }
    double d2log_q(int, const Vec&) const override { return 0.0; }
    std::string name() const override { return "flat"; }

   private:
    int dim_;
    double log_const_;
};

// phi : S x A -> R^{d_phi}.
class ActionFeatures {
   public:
    virtual ~ActionFeatures() = default;
    virtual int state_dim() const = 0;
    virtual int action_dim() const = 0;
    virtual int dim() const = 0;
    virtual Vec value(const Vec& s, const Vec& a) const = 0;
    // An upper bound on ||phi(s, a)|| over the box and the action list.
    virtual double bound(const Box& domain, const std::vector<Vec>& actions) const = 0;
    virtual std::string name() const = 0;
};

// phi(s, a) = (s, a).
class LinearActionFeatures final : public ActionFeatures {
   public:
    LinearActionFeatures(int state_dim, int action_dim);
    int state_dim() const override { return ds_; }
    int action_dim() const override { return da_; }
    int dim() const override { return ds_ + da_; }
    Vec value(const Vec& s, const Vec& a) const override;
    double bound(const Box& domain, const std::vector<Vec>& actions) const override;
    std::string name() const override { return "linear"; }

   private:
    int ds_, da_;
};

// phi(s, a) = s + a; requires d_a = d_s.
class SumActionFeatures final : public ActionFeatures {
   public:
    explicit SumActionFeatures(int state_dim);
    int state_dim() const override { return ds_; }
    int action_dim() const override { return ds_; }
    int dim() const override { return ds_; }
    Vec value(const Vec& s, const Vec& a) const override;
    double bound(const Box& domain, const std::vector<Vec>& actions) const override;
    std::string name() const override { return "sum"; }

   private:
    int ds_;
};

// phi(s, a) = (tanh(s), a), elementwise tanh.
class TanhActionFeatures final : public ActionFeatures {
   public:
    TanhActionFeatures(int state_dim, int action_dim);
    int state_dim() const override { return ds_; }
    int action_dim() const override { return da_; }
    int dim() const override { return ds_ + da_; }
    Vec value(const Vec& s, const Vec& a) const override;
    double bound(const Box& domain, const std::vector<Vec>& actions) const override;
    std::string name() const override { return "tanh"; }

   private:
    int ds_, da_;
};

// Arbitrary phi supplied as a callable with a declared bound.
class FunctionActionFeatures final : public ActionFeatures {
   public:
    using Fn = std::function<Vec(const Vec&, const Vec&)>;
    FunctionActionFeatures(int state_dim, int action_dim, int dim, Fn fn, double declared_bound,
                           std::string name = "function");
    int state_dim() const override { return ds_; }
    int action_dim() const override { return da_; }
    int dim() const override { return dim_; }
    Vec value(const Vec& s, const Vec& a) const override { return fn_(s, a); }
    double bound(const Box&, const std::vector<Vec>&) const override { return bound_; }
    std::string name() const override { return name_; }

   private:
    int ds_, da_, dim_;
    Fn fn_;
    double bound_;
    std::string name_;
};

std::shared_ptr<const ActionFeatures> make_action_features(const std::string& preset,
                                                           int state_dim, int action_dim);

}  // namespace smrl
