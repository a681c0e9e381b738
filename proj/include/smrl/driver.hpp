#pragma once
// Episodic optimistic reinforcement learning with score-matching model
// estimates: estimate, build the confidence set, plan optimistically, act,
// and keep the regret ledger.

#include <cstdint>
#include <string>
#include <vector>

#include "smrl/confidence.hpp"
#include "smrl/planner.hpp"

namespace smrl {

// Ground-truth environment. The learner observes the raw next state (drawn
// from P_W0); the agent then moves to the center of the grid cell containing
// it (after clipping), so the process the agent lives in is exactly the cell
// MDP the planner and the regret ledger use.
class Environment {
   public:
    Environment(ExpFamilyModel truth, StateGrid grid, int quad_intervals = 8);

    struct Step {
        Vec raw;    // observation fed to the estimator
        Vec state;  // cell center the agent moves to
        int cell = 0;
    };

    Step step(const Vec& s, int a, Rng& rng) const;
    Vec snap(const Vec& s) const { return grid_.center(grid_.cell_of(s)); }

    const ExpFamilyModel& truth() const { return truth_; }
    const StateGrid& grid() const { return grid_; }
    const TransitionTable& table() const { return table_; }
    int quad_intervals() const { return quad_intervals_; }

    // Return of one rollout of `policy` from s1.
    double rollout(const Policy& policy, const RewardFn& reward, const Vec& s1, Rng& rng) const;

   private:
    ExpFamilyModel truth_;
    StateGrid grid_;
    int quad_intervals_;
    TransitionTable table_;
};

enum class AdversaryKind { Fixed, RoundRobin, Uniform };

AdversaryKind parse_adversary(const std::string& s);
std::string to_string(AdversaryKind k);

struct AdversaryConfig {
    AdversaryKind kind = AdversaryKind::Fixed;
    Vec fixed_state;  // empty means the box center
};

// Initial state of episode k (1-based), snapped to its cell center.
Vec initial_state(const AdversaryConfig& adv, const StateGrid& grid, int k, std::uint64_t seed);

struct SmrlConfig {
    ExpFamilyModel model;  // maps plus the true parameter W0 in model.W
    StateGrid grid;
    RewardFn reward;
    StructuralConstants constants;
    double lambda = 0.0;  // <= 0 selects 1 / B_star^2
    double delta = 0.1;
    int K = 1;
    int H = 1;
    int n_candidates = 16;
    std::uint64_t seed = 0;
    AdversaryConfig adversary;
    WidthScaling scaling = WidthScaling::AlphaSquared;
    bool oracle = false;  // pin the set to {W0}
    int quad_intervals = 8;

    double effective_lambda() const;
    void validate() const;
};

struct StepRecord {
    Vec s;
    int a = 0;
    double r = 0.0;
    Vec s_next;      // cell center
    Vec s_next_raw;  // estimator observation
    int cell = 0;
    int next_cell = 0;
};

struct EpisodeRecord {
    int k = 0;
    Vec s1;
    std::vector<StepRecord> trajectory;
    double optimistic_value = 0.0;
    double realized_return = 0.0;
    double beta_k = 0.0;
    double gamma_k = 0.0;
    double v_star = 0.0;
    double v_pi = 0.0;
    double regret_k = 0.0;
    double cum_regret = 0.0;
    bool truth_in_set = false;
    // sum_h ||G^-1/2 Phi C Phi^T G^-1/2|| with G the Gram before this episode.
    double elliptical_term = 0.0;
    Mat W_tilde;
    Policy policy;
    int candidates_rejected = 0;
    int candidates_dropped = 0;
};

struct RunLog {
    std::vector<EpisodeRecord> episodes;
    double lambda = 0.0;
    double epsilon_grid = 0.0;
    double gamma_final = 0.0;  // log det(V_{K+1} / lambda + I)
    double elliptical_sum = 0.0;  // sum_k min(elliptical_term, 1)
    Mat W_hat_final;
    double cum_regret = 0.0;
    int truth_in_set_count = 0;
};

RunLog run_smrl(const SmrlConfig& cfg);

// Largest |V_1(cell) - V_1^fine(sub-cell)| between the grid and its refinement
// under the true parameter, over all cells and their sub-cells.
double epsilon_grid(const ExpFamilyModel& model, const StateGrid& grid, const RewardFn& reward,
                    int H, int quad_intervals = 8);

// V^pi_1(cell(s1)) under the true model's cell kernel.
double evaluate_policy_true(const Policy& policy, const ExpFamilyModel& truth,
                            const StateGrid& grid, const RewardFn& reward, const Vec& s1,
                            int quad_intervals = 8);

struct DecompositionEntry {
    int k = 0;
    double lhs = 0.0;         // V_{W~,1}(s1) - V_{W0,1}(s1) under pi^k
    double expectation_terms = 0.0;
    double martingale_terms = 0.0;
    double residual = 0.0;
    std::vector<double> m;    // m_h^k, h in [H]
};

struct DecompositionReport {
    std::vector<DecompositionEntry> entries;
    double max_residual = 0.0;
    double max_abs_m = 0.0;
    double m_mean = 0.0;
    double m_stderr = 0.0;
    std::size_t m_count = 0;
    bool bound_ok = true;  // |m| <= 2H everywhere
};

// Recomputes both sides of the recursive regret identity for every episode
// of a run on the cell MDP.
DecompositionReport regret_decomposition_check(const SmrlConfig& cfg, const RunLog& log);

}  // namespace smrl
