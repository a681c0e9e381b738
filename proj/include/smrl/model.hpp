#pragma once
// Conditional exponential-family transition models and the Gaussian
// (nonlinear dynamical system) specialization
//   s' = W0 phi(s, a) + sigma z,  z ~ N(0, I),
// which in exponential-family form reads psi(s') = sigma^-2 s',
// q = N(0, sigma^2 I), Z_sa(W) = ||W phi||^2 / (2 sigma^2).

#include <memory>
#include <string>
#include <vector>

#include "smrl/features.hpp"
#include "smrl/rng.hpp"
#include "smrl/types.hpp"

namespace smrl {

enum class Family {
    Gaussian,  // isotropic Gaussian transitions, closed-form cell kernels
    Generic,   // everything else; kernels and sampling go through quadrature
};

struct ExpFamilyModel {
    std::shared_ptr<const StateFeatures> psi;
    std::shared_ptr<const BaseMeasure> base;
    std::shared_ptr<const ActionFeatures> phi;
    Mat W;  // d_psi x d_phi
    Box domain;
    std::vector<Vec> actions;
    Family family = Family::Generic;
    double sigma = 0.0;  // noise level when family == Gaussian

    int state_dim() const { return psi->state_dim(); }
    int psi_dim() const { return psi->dim(); }
    int phi_dim() const { return phi->dim(); }
    int num_actions() const { return static_cast<int>(actions.size()); }
    int param_dim() const { return psi_dim() * phi_dim(); }

    // phi(s, actions[a]); throws DomainError on non-finite output.
    Vec features(const Vec& s, int a) const;
    ExpFamilyModel with_parameter(Mat w) const;
    double phi_bound() const { return phi->bound(domain, actions); }

    // Shape consistency between maps, W, domain and actions.
    void validate() const;
};

ExpFamilyModel make_gaussian_model(Mat w0, double sigma, Box clip_box, std::vector<Vec> actions,
                                   std::shared_ptr<const ActionFeatures> phi);

// psi(s') = (s', ..., s'^degree) on a one-dimensional domain with a N(0, base_sigma^2)
// base measure.
ExpFamilyModel make_polynomial_model(int degree, double base_sigma, Mat w, Box domain,
                                     std::vector<Vec> actions,
                                     std::shared_ptr<const ActionFeatures> phi);

// log q(s') + <psi(s'), W phi(s, a)>, log-partition omitted.
double log_unnormalized_density(const ExpFamilyModel& model, const Vec& s, int a,
                                const Vec& s_next);

// grad_{s'} log P_W(s' | s, a) = grad log q + sum_i e_i d_i psi^T W phi.
Vec score(const ExpFamilyModel& model, const Mat& w, const Vec& s, int a, const Vec& s_next);

// r(s, a) = clamp(1 - ||s - target||^2 / scale - action_cost ||a||^2, 0, 1).
struct RewardFn {
    std::string preset = "quadratic-target";
    Vec target;
    double scale = 1.0;
    double action_cost = 0.0;

    double operator()(const Vec& s, const Vec& a) const;
    static RewardFn quadratic_target(Vec target, double scale, double action_cost = 0.0);
    static RewardFn zero(int state_dim);
};

struct NonLdsInstance {
    Mat W0;  // d_s x d_phi
    double sigma = 1.0;
    RewardFn reward;
    int horizon = 1;
    Box clip_box;
    std::shared_ptr<const ActionFeatures> phi;
    std::vector<Vec> actions;

    ExpFamilyModel as_model() const;
    Vec mean(const Vec& s, int a) const { return W0 * phi->value(s, actions.at(a)); }
};

struct TransitionDraw {
    Vec raw;      // W0 phi(s, a) + sigma z
    Vec clipped;  // raw projected onto the clip box
};

TransitionDraw draw_transition(const NonLdsInstance& inst, const Vec& s, int a, Rng& rng);

// clip(W0 phi(s, a) + sigma z, clip_box).
inline Vec sample_transition(const NonLdsInstance& inst, const Vec& s, int a, Rng& rng) {
    return draw_transition(inst, s, a, rng).clipped;
}

}  // namespace smrl
