#include <algorithm>
#include <cmath>
#include <limits>

#include "smrl/confidence.hpp"
#include "smrl/errors.hpp"
#include "smrl/parallel.hpp"
#include "smrl/rng.hpp"

namespace smrl {

namespace {

CoverageReport reduce(const std::vector<double>& margins, double delta) {
    CoverageReport rep;
    rep.trials = static_cast<int>(margins.size());
    rep.delta = delta;
    rep.min_margin = std::numeric_limits<double>::infinity();
    int covered = 0;
    for (double m : margins) {
        if (m >= 0.0) ++covered;
        rep.min_margin = std::min(rep.min_margin, m);
    }
    rep.coverage = margins.empty() ? 0.0 : static_cast<double>(covered) / margins.size();
    return rep;
}

}  // namespace

CoverageReport simulate_self_normalized(const SelfNormalizedConfig& cfg) {
    if (cfg.dim_m < 1 || cfg.dim_d < 1 || cfg.n_steps < 1 || cfg.n_trials < 1)
        throw ArgumentError("self-normalized simulation: dimensions and counts must be >= 1");
    if (cfg.sigma_sq < 0.0) throw ArgumentError("self-normalized simulation: sigma^2 must be >= 0");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
        throw ArgumentError("self-normalized simulation: delta must lie in (0, 1)");

    const int d = cfg.dim_d, m = cfg.dim_m;
    const double sigma = std::sqrt(cfg.sigma_sq);
    std::vector<double> margins(static_cast<std::size_t>(cfg.n_trials));

    parallel_for(margins.size(), [&](std::size_t trial) {
        Rng rng = make_stream(cfg.seed, trial, 0, stream::kTrial);
        Mat V = Mat::Identity(d, d);  // V_n + V_0 with V_0 = I
        Vec S = Vec::Zero(d);
        double margin = std::numeric_limits<double>::infinity();
        for (int t = 0; t < cfg.n_steps; ++t) {
            Mat Phi = Mat::Zero(d, m);
            if (cfg.design == DesignKind::Adapted) {
                // The design leans on the running sum so it is adapted, not independent.
                const double gain = 1.0 + 0.5 * std::tanh(S(0));
                for (int j = 0; j < m; ++j) Phi.col(j) = gain * standard_normal(rng, d);
                if (S.norm() > 0.0) Phi.col(0) += 0.5 * S.normalized();
            }
            const Vec noise = sigma * standard_normal(rng, m);
            S.noalias() += Phi * noise;
            V.noalias() += Phi * Phi.transpose();

            Eigen::LLT<Mat> llt(V);
            const Mat& L = llt.matrixLLT();
            double half_logdet = 0.0;
            for (int i = 0; i < d; ++i) half_logdet += std::log(L(i, i));
            const double lhs = S.dot(llt.solve(S));
            const double rhs = 2.0 * cfg.sigma_sq * (half_logdet + std::log(1.0 / cfg.delta));
            margin = std::min(margin, rhs - lhs);
        }
        margins[trial] = margin;
    });
    return reduce(margins, cfg.delta);
}

CoverageReport simulate_estimator_coverage(const EstimatorCoverageConfig& cfg) {
    if (cfg.checkpoints.empty() || cfg.trials < 1)
        throw ArgumentError("estimator coverage: need checkpoints and at least one trial");
    cfg.constants.validate();
    std::vector<int> checkpoints = cfg.checkpoints;
    std::sort(checkpoints.begin(), checkpoints.end());
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
    if (checkpoints.front() < 1) throw ArgumentError("estimator coverage: checkpoints must be >= 1");
    const int n_max = checkpoints.back();

    const NonLdsInstance& inst = cfg.instance;
    const ExpFamilyModel model = inst.as_model();
    const int n_actions = model.num_actions();
    std::vector<double> margins(static_cast<std::size_t>(cfg.trials));

    parallel_for(margins.size(), [&](std::size_t trial) {
        Rng rng = make_stream(cfg.seed, trial, 0, stream::kTrial);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        SuffStats stats(model.psi_dim(), model.phi_dim());
        Vec s = inst.clip_box.clip(Vec::Zero(model.state_dim()));
        double running = 0.0;
        double margin = std::numeric_limits<double>::infinity();
        std::size_t next_check = 0;
        for (int t = 1; t <= n_max; ++t) {
            // Behaviour policy: random half the time, otherwise pushes against
            // the running mean of observed states.
            int a;
            if (unif(rng) < 0.5) {
                a = std::min(n_actions - 1, static_cast<int>(unif(rng) * n_actions));
            } else {
                a = running > 0.0 ? 0 : n_actions - 1;
            }
            const TransitionDraw draw = draw_transition(inst, s, a, rng);
            stats.accumulate(score_features(model, s, a, draw.raw));
            running = 0.9 * running + 0.1 * draw.raw(0);
            s = draw.clipped;

            if (next_check < checkpoints.size() && t == checkpoints[next_check]) {
                const Estimate est = solve_estimator(stats, cfg.lambda);
                const double beta =
                    beta_width(stats, cfg.constants, cfg.lambda, cfg.delta, cfg.scaling);
                const ConfidenceSet set = ConfidenceSet::build(est, stats, beta, cfg.delta);
                margin = std::min(margin, (beta - set.distance(inst.W0)) / beta);
                ++next_check;
            }
        }
        margins[trial] = margin;
    });
    return reduce(margins, cfg.delta);
}

}  // namespace smrl
