#include "smrl/planner.hpp"

#include <cmath>
#include <limits>

#include "smrl/errors.hpp"
#include "smrl/kernels.hpp"
#include "smrl/parallel.hpp"
#include "smrl/quadrature.hpp"

namespace smrl {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Probability that clip(mu + sigma z) lands in each cell of axis k.
std::vector<double> axis_masses(const StateGrid& grid, int k, double mu, double sigma) {
    const int n = grid.cells_on_axis(k);
    std::vector<double> p(static_cast<std::size_t>(n));
    double prev = 0.0;
    for (int j = 0; j < n; ++j) {
        const double upper = j + 1 == n ? 1.0 : normal_cdf((grid.edge(k, j + 1) - mu) / sigma);
        p[j] = std::max(0.0, upper - prev);
        prev = upper;
    }
    return p;
}

void gaussian_rows(const ExpFamilyModel& model, const Mat& w, const StateGrid& grid,
                   TransitionTable& t) {
    const int d = grid.dim();
    for (int c = 0; c < t.num_cells; ++c) {
        const Vec s = grid.center(c);
        for (int a = 0; a < t.num_actions; ++a) {
            const Vec mu = w * model.features(s, a);
            if (!mu.allFinite()) throw DomainError("transition mean is not finite");
            double* row = t.prob.data() + (static_cast<std::size_t>(c) * t.num_actions + a) * t.num_cells;
            std::vector<std::vector<double>> axes;
            for (int k = 0; k < d; ++k) axes.push_back(axis_masses(grid, k, mu(k), model.sigma));
            // Isotropic noise: the cell mass factorizes over axes.
            for (int cn = 0; cn < t.num_cells; ++cn) {
                const auto m = grid.multi(cn);
                double p = 1.0;
                for (int k = 0; k < d; ++k) p *= axes[k][m[k]];
                row[cn] = p;
            }
        }
    }
}

void quadrature_rows(const ExpFamilyModel& model, const Mat& w, const StateGrid& grid,
                     int intervals, TransitionTable& t) {
    // Node data does not depend on (cell, action): collect it once.
    std::vector<double> log_q, weight;
    std::vector<int> owner;
    std::vector<double> psi;  // row-major nodes x d_psi
    const int dpsi = model.psi_dim();
    for (int cn = 0; cn < t.num_cells; ++cn) {
        const QuadratureRule rule = trapezoid_rule(grid.cell_box(cn), intervals);
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            const Vec& x = rule.nodes[k];
            const Vec p = model.psi->value(x);
            const double lq = model.base->log_q(x);
            if (!p.allFinite() || !std::isfinite(lq))
                throw DomainError("non-finite density term at a quadrature node (psi map '" +
                                  model.psi->name() + "')");
            psi.insert(psi.end(), p.data(), p.data() + dpsi);
            log_q.push_back(lq);
            weight.push_back(rule.weights[k]);
            owner.push_back(cn);
        }
    }
    const std::size_t n_nodes = log_q.size();
    std::vector<double> logf(n_nodes);
    for (int c = 0; c < t.num_cells; ++c) {
        const Vec s = grid.center(c);
        for (int a = 0; a < t.num_actions; ++a) {
            const Vec eta = w * model.features(s, a);
            kernels::gemv(psi, std::span<const double>(eta.data(), eta.size()), logf);
            double top = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < n_nodes; ++k) {
                logf[k] += log_q[k];
                if (!std::isfinite(logf[k]))
                    throw DomainError("unnormalizable transition kernel");
                top = std::max(top, logf[k]);
            }
            double* row = t.prob.data() + (static_cast<std::size_t>(c) * t.num_actions + a) * t.num_cells;
            std::fill(row, row + t.num_cells, 0.0);
            double total = 0.0;
            for (std::size_t k = 0; k < n_nodes; ++k) {
                const double m = weight[k] * std::exp(logf[k] - top);
                row[owner[k]] += m;
                total += m;
            }
            if (!(total > 0.0) || !std::isfinite(total))
                throw DomainError("unnormalizable transition kernel");
            for (int cn = 0; cn < t.num_cells; ++cn) row[cn] /= total;
        }
    }
}

}  // namespace

TransitionTable build_transition_table(const ExpFamilyModel& model, const Mat& w,
                                       const StateGrid& grid, int quad_intervals) {
    if (grid.dim() != model.state_dim()) throw ShapeError("planner: grid and model dimensions differ");
    if (w.rows() != model.psi_dim() || w.cols() != model.phi_dim())
        throw ShapeError("planner: parameter shape mismatch");
    TransitionTable t;
    t.num_cells = grid.num_cells();
    t.num_actions = model.num_actions();
    t.prob.assign(static_cast<std::size_t>(t.num_cells) * t.num_actions * t.num_cells, 0.0);
    if (model.family == Family::Gaussian)
        gaussian_rows(model, w, grid, t);
    else
        quadrature_rows(model, w, grid, quad_intervals, t);
    return t;
}

std::vector<double> reward_table(const RewardFn& reward, const StateGrid& grid,
                                 const std::vector<Vec>& actions) {
    const int A = static_cast<int>(actions.size());
    std::vector<double> r(static_cast<std::size_t>(grid.num_cells()) * A);
    for (int c = 0; c < grid.num_cells(); ++c) {
        const Vec s = grid.center(c);
        for (int a = 0; a < A; ++a) {
            const double v = reward(s, actions[a]);
            if (!(v >= 0.0 && v <= 1.0)) throw DomainError("reward outside [0, 1]");
            r[static_cast<std::size_t>(c) * A + a] = v;
        }
    }
    return r;
}

PlannerResult dp_solve(const TransitionTable& table, const std::vector<double>& rewards, int H,
                       const std::vector<double>& terminal) {
    if (H < 1) throw ArgumentError("planner: horizon must be >= 1");
    const int C = table.num_cells, A = table.num_actions;
    const std::size_t CA = static_cast<std::size_t>(C) * A;
    if (rewards.size() != CA) throw ShapeError("planner: reward table size");
    if (!terminal.empty() && terminal.size() != static_cast<std::size_t>(C))
        throw ShapeError("planner: terminal value size");

    PlannerResult r;
    r.horizon = H;
    r.num_cells = C;
    r.num_actions = A;
    r.V.assign(static_cast<std::size_t>(H + 1) * C, 0.0);
    r.Q.assign(static_cast<std::size_t>(H) * CA, 0.0);
    r.policy.horizon = H;
    r.policy.num_cells = C;
    r.policy.action.assign(static_cast<std::size_t>(H) * C, 0);
    if (!terminal.empty()) std::copy(terminal.begin(), terminal.end(), r.V.begin() + static_cast<std::ptrdiff_t>(H) * C);

    for (int h = H - 1; h >= 0; --h) {
        std::span<const double> next(r.V.data() + static_cast<std::size_t>(h + 1) * C, C);
        std::span<double> q(r.Q.data() + static_cast<std::size_t>(h) * CA, CA);
        kernels::gemv(table.prob, next, q);
        for (std::size_t i = 0; i < CA; ++i) q[i] += rewards[i];
        for (int c = 0; c < C; ++c) {
            int best = 0;
            for (int a = 1; a < A; ++a)
                if (q[static_cast<std::size_t>(c) * A + a] > q[static_cast<std::size_t>(c) * A + best]) best = a;
            r.policy.action[static_cast<std::size_t>(h) * C + c] = best;
            r.V[static_cast<std::size_t>(h) * C + c] = q[static_cast<std::size_t>(c) * A + best];
        }
    }
    return r;
}

PlannerResult dp_plan(const ExpFamilyModel& model, const StateGrid& grid, const RewardFn& reward,
                      int H, int quad_intervals) {
    const TransitionTable t = build_transition_table(model, model.W, grid, quad_intervals);
    PlannerResult r = dp_solve(t, reward_table(reward, grid, model.actions), H);
    r.model_used = model.W;
    return r;
}

std::vector<double> evaluate_policy(const TransitionTable& table,
                                    const std::vector<double>& rewards, const Policy& policy) {
    const int C = table.num_cells, A = table.num_actions, H = policy.horizon;
    if (policy.num_cells != C) throw ShapeError("policy evaluation: policy grid mismatch");
    std::vector<double> V(static_cast<std::size_t>(H + 1) * C, 0.0);
    for (int h = H - 1; h >= 0; --h) {
        std::span<const double> next(V.data() + static_cast<std::size_t>(h + 1) * C, C);
        for (int c = 0; c < C; ++c) {
            const int a = policy.at(h, c);
            if (a < 0 || a >= A) throw ArgumentError("policy evaluation: action index out of range");
            V[static_cast<std::size_t>(h) * C + c] =
                rewards[static_cast<std::size_t>(c) * A + a] +
                kernels::dot(std::span<const double>(table.row(c, a), C), next);
        }
    }
    return V;
}

OptimisticResult optimistic_plan(const ConfidenceSet& set, const ExpFamilyModel& model,
                                 const StateGrid& grid, const RewardFn& reward, int H,
                                 const Vec& s1, Rng& rng, const OptimisticOptions& opts) {
    if (opts.n_candidates < 1) throw ArgumentError("optimistic planning: n_candidates must be >= 1");
    const int n = set.beta() > 0.0 ? opts.n_candidates : 1;
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n));
    for (int i = 1; i < n; ++i) seeds[i] = rng();

    const std::vector<double> rewards = reward_table(reward, grid, model.actions);
    const int start = grid.cell_of(s1);
    std::vector<PlannerResult> plans(static_cast<std::size_t>(n));
    std::vector<char> ok(static_cast<std::size_t>(n), 0);
    std::vector<int> rejected(static_cast<std::size_t>(n), 0);

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        if (i == 0) {
            const TransitionTable t = build_transition_table(model, set.center(), grid, opts.quad_intervals);
            plans[0] = dp_solve(t, rewards, H);
            plans[0].model_used = set.center();
            ok[0] = 1;
            return;
        }
        Rng local(seeds[i]);
        for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
            const Mat w = set.boundary_point(unit_sphere(local, set.dim()));
            try {
                const TransitionTable t = build_transition_table(model, w, grid, opts.quad_intervals);
                plans[i] = dp_solve(t, rewards, H);
                plans[i].model_used = w;
                ok[i] = 1;
                return;
            } catch (const DomainError&) {
                ++rejected[i];
            }
        }
    });

    OptimisticResult out;
    out.optimistic_value = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        out.rejected += rejected[i];
        if (!ok[i]) {
            ++out.dropped;
            out.candidate_values.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const double v = plans[i].value(0, start);
        out.candidate_values.push_back(v);
        if (v > out.optimistic_value) {
            out.optimistic_value = v;
            out.chosen = i;
        }
    }
    out.plan = std::move(plans[out.chosen]);
    out.W_tilde = out.plan.model_used;
    return out;
}

}  // namespace smrl
