#include <cmath>

#include "smrl/driver.hpp"
#include "smrl/errors.hpp"
#include "smrl/kernels.hpp"

namespace smrl {

DecompositionReport regret_decomposition_check(const SmrlConfig& cfg, const RunLog& log) {
    const ExpFamilyModel& M = cfg.model;
    const StateGrid& grid = cfg.grid;
    const int C = grid.num_cells();
    const TransitionTable truth = build_transition_table(M, M.W, grid, cfg.quad_intervals);
    const std::vector<double> rewards = reward_table(cfg.reward, grid, M.actions);

    DecompositionReport rep;
    double sum = 0.0, sum_sq = 0.0;
    for (const EpisodeRecord& ep : log.episodes) {
        if (ep.W_tilde.size() == 0) throw ArgumentError("decomposition: run log lacks W_tilde");
        const TransitionTable opt = build_transition_table(M, ep.W_tilde, grid, cfg.quad_intervals);
        const std::vector<double> Vt = evaluate_policy(opt, rewards, ep.policy);
        const std::vector<double> V0 = evaluate_policy(truth, rewards, ep.policy);
        const int H = ep.policy.horizon;

        DecompositionEntry e;
        e.k = ep.k;
        const int c1 = ep.trajectory.front().cell;
        e.lhs = Vt[static_cast<std::size_t>(c1)] - V0[static_cast<std::size_t>(c1)];
        for (int h = 0; h < H; ++h) {
            const StepRecord& st = ep.trajectory[static_cast<std::size_t>(h)];
            std::span<const double> vt_next(Vt.data() + static_cast<std::size_t>(h + 1) * C, C);
            std::span<const double> v0_next(V0.data() + static_cast<std::size_t>(h + 1) * C, C);
            std::span<const double> p_opt(opt.row(st.cell, st.a), C);
            std::span<const double> p_true(truth.row(st.cell, st.a), C);

            e.expectation_terms += kernels::dot(p_opt, vt_next) - kernels::dot(p_true, vt_next);
            const double m = (kernels::dot(p_true, vt_next) - kernels::dot(p_true, v0_next)) -
                             (vt_next[static_cast<std::size_t>(st.next_cell)] -
                              v0_next[static_cast<std::size_t>(st.next_cell)]);
            e.m.push_back(m);
            e.martingale_terms += m;
            rep.max_abs_m = std::max(rep.max_abs_m, std::abs(m));
            if (std::abs(m) > 2.0 * H) rep.bound_ok = false;
            sum += m;
            sum_sq += m * m;
            ++rep.m_count;
        }
        e.residual = std::abs(e.lhs - e.expectation_terms - e.martingale_terms);
        rep.max_residual = std::max(rep.max_residual, e.residual);
        rep.entries.push_back(std::move(e));
    }
    if (rep.m_count > 0) {
        const double n = static_cast<double>(rep.m_count);
        rep.m_mean = sum / n;
        const double var = rep.m_count > 1 ? (sum_sq - n * rep.m_mean * rep.m_mean) / (n - 1) : 0.0;
        rep.m_stderr = std::sqrt(std::max(0.0, var) / n);
    }
    return rep;
}

}  // namespace smrl
