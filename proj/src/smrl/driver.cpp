#include "smrl/driver.hpp"

#include <algorithm>
#include <cmath>

#include "smrl/errors.hpp"

namespace smrl {

double SmrlConfig::effective_lambda() const {
    if (lambda > 0.0) return lambda;
    if (!(constants.B_star > 0.0)) throw ConfigError("lambda: default 1 / B_star^2 needs B_star > 0");
    return 1.0 / (constants.B_star * constants.B_star);
}

void SmrlConfig::validate() const {
    model.validate();
    constants.validate();
    if (K < 1 || H < 1) throw ConfigError("run: K and H must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("run: delta must lie in (0, 1)");
    if (n_candidates < 1) throw ConfigError("run: n_candidates must be >= 1");
    if (quad_intervals < 1) throw ConfigError("run: quad_intervals must be >= 1");
    if (grid.dim() != model.state_dim()) throw ConfigError("run: grid and model dimensions differ");
    if (model.family != Family::Gaussian &&
        (grid.box().lo != model.domain.lo || grid.box().hi != model.domain.hi))
        throw ConfigError("run: for non-Gaussian models the grid must cover the model domain exactly");
    effective_lambda();
}

namespace {

// Largest eigenvalue of X^T G^-1 X, the spectral norm of G^-1/2 X X^T G^-1/2.
double whitened_norm(const Eigen::LLT<Mat>& gram, const Mat& X) {
    const Mat Y = gram.matrixL().solve(X);
    const Mat M = Y.transpose() * Y;
    Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
    return std::max(0.0, es.eigenvalues().maxCoeff());
}

Mat design_columns(const ScoreFeatures& f) {
    const Eigen::Index dpsi = f.dpsi.rows(), dphi = f.phi.size();
    Mat X(dpsi * dphi, f.dpsi.cols());
    for (Eigen::Index i = 0; i < f.dpsi.cols(); ++i)
        for (Eigen::Index j = 0; j < dphi; ++j) X.col(i).segment(j * dpsi, dpsi) = f.phi(j) * f.dpsi.col(i);
    return X;
}

std::string episode_prefix(int k) { return "episode " + std::to_string(k) + ": "; }

}  // namespace

RunLog run_smrl(const SmrlConfig& cfg) {
    cfg.validate();
    const ExpFamilyModel& M = cfg.model;
    const Mat& W0 = M.W;
    const double lambda = cfg.effective_lambda();
    const Environment env(M, cfg.grid, cfg.quad_intervals);
    const std::vector<double> rewards = reward_table(cfg.reward, cfg.grid, M.actions);
    const PlannerResult star = dp_solve(env.table(), rewards, cfg.H);

    RunLog log;
    log.lambda = lambda;
    log.epsilon_grid = epsilon_grid(M, cfg.grid, cfg.reward, cfg.H, cfg.quad_intervals);
    SuffStats stats(M.psi_dim(), M.phi_dim());
    const OptimisticOptions opts{cfg.n_candidates, 10, cfg.quad_intervals};

    for (int k = 1; k <= cfg.K; ++k) {
        EpisodeRecord rec;
        rec.k = k;
        try {
            rec.s1 = initial_state(cfg.adversary, cfg.grid, k, cfg.seed);

            ConfidenceSet set;
            if (cfg.oracle) {
                set = ConfidenceSet::singleton(W0);
                rec.gamma_k = information_gain(stats, lambda);
            } else if (k == 1) {
                // No data yet: plan around W = 0 with candidates at radius B_star.
                set = ConfidenceSet::ball(Mat::Zero(W0.rows(), W0.cols()), cfg.constants.B_star);
            } else {
                const Estimate est = solve_estimator(stats, lambda);
                rec.gamma_k = information_gain(stats, lambda);
                const double beta =
                    beta_from_gain(rec.gamma_k, cfg.constants, lambda, cfg.delta / 2, cfg.scaling);
                set = ConfidenceSet::build(est, stats, beta, cfg.delta / 2);
            }
            rec.beta_k = set.beta();
            rec.truth_in_set = set.contains(W0);

            Rng cand_rng = make_stream(cfg.seed, static_cast<std::uint64_t>(k), 0, stream::kCandidates);
            OptimisticResult opt = optimistic_plan(set, M, cfg.grid, cfg.reward, cfg.H, rec.s1, cand_rng, opts);
            rec.optimistic_value = opt.optimistic_value;
            rec.W_tilde = opt.W_tilde;
            rec.policy = opt.plan.policy;
            rec.candidates_rejected = opt.rejected;
            rec.candidates_dropped = opt.dropped;

            Mat gram = stats.V_hat();
            gram.diagonal().array() += lambda;
            const Eigen::LLT<Mat> gram_llt(gram);

            Vec s = rec.s1;
            for (int h = 0; h < cfg.H; ++h) {
                StepRecord st;
                st.s = s;
                st.cell = cfg.grid.cell_of(s);
                st.a = rec.policy.at(h, st.cell);
                st.r = cfg.reward(s, M.actions[st.a]);
                Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(k),
                                      static_cast<std::uint64_t>(h), stream::kTransition);
                const Environment::Step step = env.step(s, st.a, rng);
                st.s_next = step.state;
                st.s_next_raw = step.raw;
                st.next_cell = step.cell;

                const ScoreFeatures f = score_features(M, s, st.a, step.raw);
                rec.elliptical_term += whitened_norm(gram_llt, design_columns(f));
                stats.accumulate(f);

                rec.realized_return += st.r;
                rec.trajectory.push_back(std::move(st));
                s = step.state;
            }

            const int c1 = cfg.grid.cell_of(rec.s1);
            rec.v_star = star.value(0, c1);
            rec.v_pi = evaluate_policy(env.table(), rewards, rec.policy)[static_cast<std::size_t>(c1)];
            rec.regret_k = rec.v_star - rec.v_pi;
        } catch (const NumericalError& e) {
            throw NumericalError(episode_prefix(k) + e.what(), e.condition_estimate());
        } catch (const DomainError& e) {
            throw DomainError(episode_prefix(k) + e.what());
        } catch (const ShapeError& e) {
            throw ShapeError(episode_prefix(k) + e.what());
        } catch (const UnsupportedDimension& e) {
            throw UnsupportedDimension(episode_prefix(k) + e.what());
        } catch (const ArgumentError& e) {
            throw ArgumentError(episode_prefix(k) + e.what());
        }

        log.cum_regret += rec.regret_k;
        rec.cum_regret = log.cum_regret;
        log.elliptical_sum += std::min(rec.elliptical_term, 1.0);
        if (rec.truth_in_set) ++log.truth_in_set_count;
        log.episodes.push_back(std::move(rec));
    }

    log.gamma_final = information_gain(stats, lambda);
    log.W_hat_final = solve_estimator(stats, lambda).W_hat;
    return log;
}

double epsilon_grid(const ExpFamilyModel& model, const StateGrid& grid, const RewardFn& reward,
                    int H, int quad_intervals) {
    const StateGrid fine = grid.refined();
    const PlannerResult coarse_plan = dp_plan(model, grid, reward, H, quad_intervals);
    const PlannerResult fine_plan = dp_plan(model, fine, reward, H, quad_intervals);
    const int d = grid.dim();
    double gap = 0.0;
    for (int c = 0; c < grid.num_cells(); ++c) {
        const auto m = grid.multi(c);
        for (unsigned corner = 0; corner < (1u << d); ++corner) {
            std::vector<int> fm(m.size());
            for (int k = 0; k < d; ++k) fm[k] = 2 * m[k] + static_cast<int>((corner >> k) & 1u);
            gap = std::max(gap, std::abs(coarse_plan.value(0, c) - fine_plan.value(0, fine.flat(fm))));
        }
    }
    return gap;
}

double evaluate_policy_true(const Policy& policy, const ExpFamilyModel& truth,
                            const StateGrid& grid, const RewardFn& reward, const Vec& s1,
                            int quad_intervals) {
    const TransitionTable t = build_transition_table(truth, truth.W, grid, quad_intervals);
    const std::vector<double> V = evaluate_policy(t, reward_table(reward, grid, truth.actions), policy);
    return V[static_cast<std::size_t>(grid.cell_of(s1))];
}

}  // namespace smrl
