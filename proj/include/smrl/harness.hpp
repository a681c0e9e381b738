#pragma once
// Configuration, persistence, the ridge comparator and the verification
// suite behind the smrl-lab CLI.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "smrl/driver.hpp"
#include "smrl/quadrature.hpp"

namespace smrl {

using json = nlohmann::json;

// ---- configuration ----

struct ModelSpec {
    std::string kind = "nonlds";  // nonlds | custom-poly
    int d_s = 1;
    int d_phi = 2;
    double sigma = 0.3;              // nonlds noise; custom-poly base-measure scale
    int degree = 2;                  // custom-poly only: psi(s') = (s', ..., s'^degree)
    std::vector<double> W0;          // row-major d_psi x d_phi
    std::vector<double> clip_lo, clip_hi;
    std::vector<std::vector<double>> actions;
    std::string phi = "tanh";        // linear | tanh | sum

    int psi_dim() const { return kind == "nonlds" ? d_s : degree; }
};

struct RewardSpec {
    std::string preset = "quadratic-target";  // quadratic-target | zero
    std::vector<double> target;
    double scale = 1.0;
    double action_cost = 0.0;
};

struct RunConfig {
    ModelSpec model;
    std::vector<int> grid_cells{51};
    bool constants_auto = true;  // nonlds: derive from sigma
    StructuralConstants constants;
    double lambda = 0.0;  // 0 means 1 / B_star^2
    double delta = 0.1;
    int K = 200;
    int H = 5;
    int n_candidates = 16;
    std::uint64_t seed = 0;
    std::string adversary = "fixed";
    std::vector<double> adversary_state;
    RewardSpec reward;
    std::string beta_scaling = "alpha1^2";
    bool oracle = false;
    int quad_intervals = 8;
};

// The one-dimensional benchmark: s' = W0 (tanh s, a) + 0.3 z on [-2.5, 2.5].
RunConfig benchmark_config();

RunConfig parse_run_config(const json& j);
json to_json(const RunConfig& c);
RunConfig load_run_config(const std::string& path);

ExpFamilyModel build_model(const ModelSpec& m);
RewardFn build_reward(const RewardSpec& r, int d_s);
NonLdsInstance build_nonlds(const RunConfig& c);
StructuralConstants resolve_constants(const RunConfig& c);
StateGrid build_grid(const RunConfig& c);
SmrlConfig build_smrl_config(const RunConfig& c);

// ---- persistence ----

std::string episodes_csv(const RunLog& log);
json run_summary(const RunConfig& cfg, const RunLog& log);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

// Columns s[0..d_s), a-index, s_next[0..d_s); a header line is skipped when present.
std::vector<Transition> read_transitions_csv(const std::string& path, int d_s);
json estimate_json(const Estimate& est, std::size_t n);

std::string value_table_csv(const PlannerResult& plan, const StateGrid& grid);
std::string q_table_csv(const PlannerResult& plan, const StateGrid& grid);
json policy_json(const PlannerResult& plan, const StateGrid& grid);

// ---- comparators ----

// W = (sum s' phi^T)(sum phi phi^T + (lambda_mle / 2) I)^-1 for the Gaussian model.
Mat mle_ridge_baseline(const ExpFamilyModel& model, std::span<const Transition> data,
                       double lambda_mle);
// Score-matching ridge that reproduces mle_ridge_baseline: lambda_mle / (2 sigma^4).
double matched_sm_lambda(double lambda_mle, double sigma);

struct TvCheck {
    double lhs = 0.0;  // |E_p f - E_q f|
    double rhs = 0.0;  // TV(p, q)
};

// p and q must share one quadrature rule.
TvCheck tv_bound_check(const std::function<double(const Vec&)>& f, const GridDensity& p,
                       const GridDensity& q);

// ---- sweeps and fits ----

struct GrowthFit {
    double c_sqrt = 0.0, resid_sqrt = 0.0;  // R(k) ~ c sqrt(k)
    double c_lin = 0.0, resid_lin = 0.0;    // R(k) ~ c k
};

// Least-squares fits through the origin of curve[k - 1] = R(k).
GrowthFit fit_growth(const std::vector<double>& curve);

struct SweepVariant {
    std::string label;
    RunConfig config;
};

struct SweepCurve {
    std::string label;
    std::vector<double> mean;    // mean cumulative regret per k
    std::vector<double> std_error;  // standard error over seeds
    int seeds = 0;
};

struct SweepResult {
    std::vector<SweepCurve> curves;
    std::vector<std::vector<RunLog>> logs;  // [variant][seed]
};

// Runs each variant for seeds base_seed .. base_seed + n_seeds - 1.
SweepResult run_sweep(const std::vector<SweepVariant>& variants, int n_seeds,
                      std::uint64_t base_seed);
std::string sweep_csv(const SweepResult& r);
std::string regret_svg(const SweepResult& r);

// ---- verification ----

struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string anchor;
    std::string detail;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    bool passed() const;
    json to_json() const;
};

struct VerifyOptions {
    std::uint64_t seed = 7;
    bool quick = false;     // smaller trial counts, for smoke runs
    bool tamper_b = false;  // flip the sign of b_hat in the closed-form check
};

VerificationReport verify_all(const VerifyOptions& opts);
// Only the two concentration simulations.
VerificationReport verify_concentration(const VerifyOptions& opts);

// Individual checks, also used by verify_all.
CheckResult check_closed_form(const VerifyOptions& o);
CheckResult check_mle_equivalence(const VerifyOptions& o);
CheckResult check_fisher_quadratic_form(const VerifyOptions& o);
CheckResult check_estimator_coverage(const VerifyOptions& o);
CheckResult check_self_normalized(const VerifyOptions& o);
CheckResult check_kl_bound(const VerifyOptions& o);
CheckResult check_log_partition_derivatives(const VerifyOptions& o);
CheckResult check_tv_bound(const VerifyOptions& o);
// Benchmark-run checks: telescoping, decomposition, sublinearity, determinism.
std::vector<CheckResult> check_benchmark_runs(const VerifyOptions& o);

}  // namespace smrl
