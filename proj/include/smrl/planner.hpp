#pragma once
// Finite-horizon planning on a uniform cell grid over the clip box. Transition
// kernels are aggregated to cells (Gaussian CDF differences for the Gaussian
// family, per-cell quadrature otherwise) and solved by backward induction.

#include <cstdint>
#include <vector>

#include "smrl/confidence.hpp"
#include "smrl/model.hpp"
#include "smrl/rng.hpp"

namespace smrl {

class StateGrid {
   public:
    StateGrid() = default;
    // cells_per_axis[k] uniform cells on axis k of the box.
    StateGrid(Box box, std::vector<int> cells_per_axis);
    static StateGrid uniform(const Box& box, int cells_per_axis);

    const Box& box() const { return box_; }
    int dim() const { return box_.dim(); }
    int num_cells() const { return num_cells_; }
    int cells_on_axis(int k) const { return cells_[k]; }
    double width(int k) const { return width_[k]; }
    double edge(int k, int j) const;  // j in [0, cells_on_axis(k)]

    // Flat index; axis 0 varies fastest.
    int flat(const std::vector<int>& multi) const;
    std::vector<int> multi(int flat) const;

    // Cell containing s after clipping to the box (upper faces belong to the last cell).
    int cell_of(const Vec& s) const;
    int axis_cell(int k, double x) const;
    Vec center(int cell) const;
    Box cell_box(int cell) const;
    // Same box with twice as many cells on every axis.
    StateGrid refined() const;

   private:
    Box box_;
    std::vector<int> cells_;
    std::vector<double> width_;
    int num_cells_ = 0;
};

// P(cell' | cell, a) stored row-major with row index cell * A + a.
struct TransitionTable {
    int num_cells = 0;
    int num_actions = 0;
    std::vector<double> prob;

    const double* row(int cell, int a) const {
        return prob.data() + (static_cast<std::size_t>(cell) * num_actions + a) * num_cells;
    }
    double at(int cell, int a, int next) const { return row(cell, a)[next]; }
};

// Cell kernel of the model with parameter w. quad_intervals is the number of
// trapezoid sub-intervals per cell axis for non-Gaussian models. Throws
// DomainError when the kernel cannot be normalized.
TransitionTable build_transition_table(const ExpFamilyModel& model, const Mat& w,
                                       const StateGrid& grid, int quad_intervals = 8);

// r(center(cell), action) laid out as cell * A + a.
std::vector<double> reward_table(const RewardFn& reward, const StateGrid& grid,
                                 const std::vector<Vec>& actions);

struct Policy {
    int horizon = 0;
    int num_cells = 0;
    std::vector<int> action;  // h * num_cells + cell, h in [0, H)

    int at(int h, int cell) const { return action[static_cast<std::size_t>(h) * num_cells + cell]; }
};

struct PlannerResult {
    int horizon = 0;
    int num_cells = 0;
    int num_actions = 0;
    std::vector<double> V;  // (H + 1) x cells, V[H] = terminal
    std::vector<double> Q;  // H x cells x actions
    Policy policy;
    Mat model_used;

    double value(int h, int cell) const { return V[static_cast<std::size_t>(h) * num_cells + cell]; }
    double q(int h, int cell, int a) const {
        return Q[(static_cast<std::size_t>(h) * num_cells + cell) * num_actions + a];
    }
};

// Backward induction; ties go to the lowest action index. terminal defaults to 0.
PlannerResult dp_solve(const TransitionTable& table, const std::vector<double>& rewards, int H,
                       const std::vector<double>& terminal = {});

PlannerResult dp_plan(const ExpFamilyModel& model, const StateGrid& grid, const RewardFn& reward,
                      int H, int quad_intervals = 8);

// V^pi_h for h in [0, H], same layout as PlannerResult::V.
std::vector<double> evaluate_policy(const TransitionTable& table,
                                    const std::vector<double>& rewards, const Policy& policy);

struct OptimisticResult {
    PlannerResult plan;
    double optimistic_value = 0.0;
    Mat W_tilde;
    int chosen = 0;    // 0 is the center
    int rejected = 0;  // candidates redrawn because their kernel failed to normalize
    int dropped = 0;   // candidates that stayed unnormalizable after all retries
    std::vector<double> candidate_values;
};

struct OptimisticOptions {
    int n_candidates = 16;
    int max_retries = 10;
    int quad_intervals = 8;
};

// Plans under the center and n_candidates - 1 boundary points of the set and
// keeps the one with the largest V_1(cell(s1)). model supplies the maps; its W
// is ignored.
OptimisticResult optimistic_plan(const ConfidenceSet& set, const ExpFamilyModel& model,
                                 const StateGrid& grid, const RewardFn& reward, int H,
                                 const Vec& s1, Rng& rng, const OptimisticOptions& opts = {});

}  // namespace smrl
