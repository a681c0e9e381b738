#pragma once
// Ellipsoidal confidence sets around the score-matching estimate,
//   { W : ||vec(W_hat) - vec(W)||_{V + lambda I} <= beta },
// the width beta, the information gain log det(V / lambda + I), and the
// Monte Carlo concentration experiments that back them.

#include <cstdint>
#include <string>
#include <vector>

#include "smrl/model.hpp"
#include "smrl/score_matching.hpp"

namespace smrl {

struct StructuralConstants {
    double B_psi = 1.0;
    double B_c = 0.0;
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    double kappa = 1.0;
    double B_star = 1.0;  // bound on ||W0||_F

    void validate() const;
    // Gaussian transitions with noise sigma: B_psi = sigma^-6, B_c = 0,
    // alpha1 = alpha2 = sigma^-4, kappa = sigma^-2.
    static StructuralConstants nonlds(double sigma, double B_star);
};

enum class WidthScaling {
    AlphaSquared,  // sqrt(2 (B_psi + B_c) / alpha1^2), the published constant
    Alpha,         // sqrt(2 (B_psi + B_c) / alpha1)
};

WidthScaling parse_width_scaling(const std::string& s);
std::string to_string(WidthScaling s);

// log det(V / lambda + I) from the Cholesky factor.
double information_gain(const Mat& V, double lambda);
double information_gain(const SuffStats& stats, double lambda);

// beta = c sqrt(gamma / 2 + log(1 / delta)) + sqrt(lambda) B_star, where
// gamma = log det(V / lambda + I) and c depends on the scaling.
double beta_from_gain(double gamma, const StructuralConstants& consts, double lambda,
                      double delta, WidthScaling scaling = WidthScaling::AlphaSquared);
double beta_width(const SuffStats& stats, const StructuralConstants& consts, double lambda,
                  double delta, WidthScaling scaling = WidthScaling::AlphaSquared);

class ConfidenceSet {
   public:
    ConfidenceSet() = default;

    // Center W_hat, gram V + lambda I.
    static ConfidenceSet build(const Estimate& est, const SuffStats& stats, double beta,
                               double delta);
    // Frobenius ball of the given radius (gram = I).
    static ConfidenceSet ball(Mat center, double radius);
    // {W}: beta = 0.
    static ConfidenceSet singleton(Mat w);

    const Mat& center() const { return center_; }
    const Mat& gram() const { return gram_; }
    const Eigen::LLT<Mat>& factor() const { return factor_; }
    double beta() const { return beta_; }
    double lambda() const { return lambda_; }
    double delta() const { return delta_; }
    int dim() const { return static_cast<int>(gram_.rows()); }

    // ||vec(W_hat) - vec(W)||_gram through the factor.
    double distance(const Mat& w) const;
    // Same norm from the explicit quadratic form; used to cross-check.
    double distance_direct(const Mat& w) const;
    bool contains(const Mat& w) const { return distance(w) <= beta_; }

    // W_hat + beta L^-T u for a unit vector u, shrunk by a relative 1e-12 so
    // rounding never pushes it outside.
    Mat boundary_point(const Vec& u) const;

   private:
    Mat center_;
    Mat gram_;
    Eigen::LLT<Mat> factor_;
    double beta_ = 0.0;
    double lambda_ = 0.0;
    double delta_ = 0.0;
};

struct CoverageReport {
    int trials = 0;
    double delta = 0.0;
    double coverage = 0.0;
    // Smallest (bound - statistic) seen over all trials and checkpoints;
    // negative exactly when some trial violated the bound.
    double min_margin = 0.0;
};

enum class DesignKind { Adapted, Zero };

struct SelfNormalizedConfig {
    int dim_m = 2;  // noise dimension
    int dim_d = 3;  // design dimension
    double sigma_sq = 1.0;
    int n_steps = 200;
    int n_trials = 1000;
    double delta = 0.1;
    DesignKind design = DesignKind::Adapted;
    std::uint64_t seed = 1;
};

// S_n = sum_t Phi_t Delta_t with Phi_t in R^{d x m} depending on the past and
// Delta_t ~ N(0, sigma^2 I_m); V_0 = I. A trial is covered when
//   ||S_n||^2_{(V_n + V_0)^-1} <= 2 sigma^2 log(det(V_n + V_0)^{1/2} / delta)
// for every n <= n_steps.
CoverageReport simulate_self_normalized(const SelfNormalizedConfig& cfg);

struct EstimatorCoverageConfig {
    NonLdsInstance instance;
    StructuralConstants constants;
    double lambda = 1.0;
    double delta = 0.1;
    std::vector<int> checkpoints{100, 500, 2000};
    int trials = 500;
    WidthScaling scaling = WidthScaling::AlphaSquared;
    std::uint64_t seed = 1;
};

// Rolls out the Gaussian system under a history-dependent behaviour policy,
// fits the score-matching estimator at each checkpoint and tests W0 against
// the set of width beta_n. margin is (beta - distance) / beta.
CoverageReport simulate_estimator_coverage(const EstimatorCoverageConfig& cfg);

struct KlCheck {
    double kl = 0.0;
    double bound = 0.0;
};

// KL(P_W || P_W') and (kappa / 2) ||(W - W') phi(s, a)||^2. Closed form for
// the Gaussian family, quadrature for d_s = 1 otherwise.
KlCheck kl_bound_check(const StructuralConstants& consts, const ExpFamilyModel& model,
                       const Mat& w, const Mat& w_prime, const Vec& s, int a,
                       int grid_resolution = 2048);

// Largest eigenvalue of Cov_{P_W(.|s,a)}[psi(s')] (quadrature, d_s <= 2).
double psi_covariance_max_eig(const ExpFamilyModel& model, const Mat& w, const Vec& s, int a,
                              int grid_resolution);

struct CalibrationReport {
    StructuralConstants constants;
    std::vector<std::string> warnings;
};

// Empirical scan for alpha1, alpha2 (eigenvalues of C(s') over a grid of s')
// and kappa (psi covariance along segments between the given parameters and
// the model's W, at the given (s, a) pairs). B_psi, B_c and B_star are taken
// from `given`. Produces warnings when the scan contradicts `given`; it never
// certifies the assumption.
CalibrationReport calibrate_constants(const ExpFamilyModel& model,
                                      const StructuralConstants& given,
                                      const std::vector<Mat>& parameters,
                                      const std::vector<std::pair<Vec, int>>& state_actions,
                                      int grid_resolution = 256, int segment_points = 5);

}  // namespace smrl
