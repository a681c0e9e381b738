#pragma once
// Score-matching estimation for exponential-family transitions.
//
// With column-stacking vec, Phi(s, a) = phi(s, a) (x) I_{d_psi} so that
// Phi^T vec(W) = W phi(s, a). Per sample:
//   C(s')  = sum_i d_i psi d_i psi^T
//   xi(s') = sum_i d_i log q d_i psi + d_i^2 psi
// and the empirical loss is  1/2 <vec W, V vec W> + <vec W, b> + const  with
//   V = sum_t Phi_t C_t Phi_t^T,  b = sum_t Phi_t xi_t.
// The regularized minimizer solves (V + lambda I) vec(W) = -b.

#include <cstddef>
#include <span>
#include <vector>

#include "smrl/model.hpp"

namespace smrl {

struct Transition {
    Vec s;
    int a = 0;
    Vec s_next;
};

struct ScoreFeatures {
    Vec phi;      // phi(s, a), d_phi
    Mat dpsi;     // column i holds d_i psi(s'), d_psi x d_s
    Mat Phi;      // d_psi d_phi x d_psi
    Mat C;        // d_psi x d_psi
    Vec xi;       // d_psi
    double const_term = 0.0;  // 1/2 sum_i (d_i log q)^2 + 2 d_i^2 log q
};

ScoreFeatures score_features(const ExpFamilyModel& model, const Vec& s, int a, const Vec& s_next);

// Phi(s, a) for a given phi vector.
Mat kron_phi(const Vec& phi, int d_psi);

class SuffStats {
   public:
    SuffStats() = default;
    SuffStats(int d_psi, int d_phi);

    // V += Phi C Phi^T, b += Phi xi, n += 1. Implemented as d_s rank-one
    // updates with x_i = phi (x) d_i psi.
    void accumulate(const ScoreFeatures& f);

    int d_psi() const { return d_psi_; }
    int d_phi() const { return d_phi_; }
    int dim() const { return d_psi_ * d_phi_; }
    std::size_t n() const { return n_; }
    const Mat& V_hat() const { return V_; }
    const Vec& b_hat() const { return b_; }
    double const_term() const { return const_; }

   private:
    int d_psi_ = 0;
    int d_phi_ = 0;
    std::size_t n_ = 0;
    Mat V_;
    Vec b_;
    double const_ = 0.0;
};

// Functional form of SuffStats::accumulate.
SuffStats accumulate(SuffStats stats, const ScoreFeatures& f);

SuffStats accumulate_dataset(const ExpFamilyModel& model, std::span<const Transition> data);

struct Estimate {
    Mat W_hat;
    double lambda = 0.0;
    Eigen::LLT<Mat> gram;  // factor of V + lambda I (+ jitter when it was needed)
    double jitter = 0.0;
    double residual_norm = 0.0;  // ||(V + lambda I) vec W + b||
};

Estimate solve_estimator(const SuffStats& stats, double lambda);

// 1/2 <vec W, V vec W> + <vec W, b> + const.
double quadratic_form_loss(const SuffStats& stats, const Mat& w);

// 1/2 sum_t sum_i (d_i log P_W)^2 + 2 d_i^2 log P_W, evaluated sample by sample.
double empirical_loss_direct(const ExpFamilyModel& model, std::span<const Transition> data,
                             const Mat& w);

struct FisherDivergence {
    double direct = 0.0;          // 1/2 E_{W0} ||score_W0 - score_W||^2 by quadrature
    double quadratic_form = 0.0;  // 1/2 <vec(W - W0), V_bar vec(W - W0)>
    Mat V_bar;                    // population Gram under P_W0(. | s, a)
};

// model.W plays the role of the true parameter W0. d_s = 1 only.
FisherDivergence fisher_divergence_quadrature(const ExpFamilyModel& model, const Mat& w,
                                              const Vec& s, int a, int grid_resolution);

}  // namespace smrl
