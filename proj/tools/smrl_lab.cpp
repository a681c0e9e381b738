// smrl-lab: estimate | plan | run | sweep | verify
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "smrl/errors.hpp"
#include "smrl/harness.hpp"

namespace fs = std::filesystem;
using namespace smrl;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kConfigError = 2, kNumericalError = 3 };

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "run config JSON (defaults to the built-in benchmark)");
    app->add_option("--seed", c.seed, "override the config seed");
    app->add_option("--out", c.out, "output directory")->capture_default_str();
}

RunConfig load(const Common& c) {
    RunConfig cfg = c.config.empty() ? benchmark_config() : load_run_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    return cfg;
}

std::string out_path(const Common& c, const std::string& name) {
    fs::create_directories(c.out);
    return (fs::path(c.out) / name).string();
}

int cmd_estimate(const Common& c, const std::string& data_path) {
    const RunConfig cfg = load(c);
    const SmrlConfig s = build_smrl_config(cfg);
    const auto data = read_transitions_csv(data_path, cfg.model.d_s);
    for (const auto& t : data)
        if (t.a < 0 || t.a >= s.model.num_actions())
            throw ConfigError("dataset: action index " + std::to_string(t.a) + " out of range");
    const SuffStats stats = accumulate_dataset(s.model, data);
    const Estimate est = solve_estimator(stats, s.effective_lambda());
    const json j = estimate_json(est, stats.n());
    write_text(out_path(c, "estimate.json"), j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return kOk;
}

int cmd_plan(const Common& c) {
    const RunConfig cfg = load(c);
    const SmrlConfig s = build_smrl_config(cfg);
    const PlannerResult plan = dp_plan(s.model, s.grid, s.reward, s.H, s.quad_intervals);
    write_text(out_path(c, "V.csv"), value_table_csv(plan, s.grid));
    write_text(out_path(c, "Q.csv"), q_table_csv(plan, s.grid));
    write_text(out_path(c, "policy.json"), policy_json(plan, s.grid).dump(2) + "\n");
    std::cout << "planned " << s.grid.num_cells() << " cells, H = " << s.H << "\n";
    return kOk;
}

int cmd_run(const Common& c) {
    const RunConfig cfg = load(c);
    const SmrlConfig s = build_smrl_config(cfg);
    const RunLog log = run_smrl(s);
    const DecompositionReport d = regret_decomposition_check(s, log);
    json summary = run_summary(cfg, log);
    summary["decomposition"] = {{"max_residual", d.max_residual},
                                {"max_abs_m", d.max_abs_m},
                                {"m_mean", d.m_mean},
                                {"m_stderr", d.m_stderr},
                                {"bound_ok", d.bound_ok}};
    write_text(out_path(c, "episodes.csv"), episodes_csv(log));
    write_text(out_path(c, "run.json"), summary.dump(2) + "\n");
    std::cout << "K = " << log.episodes.size() << ", R(K) = " << log.cum_regret
              << ", eps_grid = " << log.epsilon_grid << "\n";
    return kOk;
}

int cmd_sweep(const Common& c, int seeds, bool with_oracle, bool svg) {
    const RunConfig cfg = load(c);
    std::vector<SweepVariant> variants{{"smrl", cfg}};
    if (with_oracle) {
        RunConfig o = cfg;
        o.oracle = true;
        variants.push_back({"oracle", o});
    }
    const SweepResult r = run_sweep(variants, seeds, cfg.seed);
    write_text(out_path(c, "sweep.csv"), sweep_csv(r));
    if (svg) write_text(out_path(c, "regret.svg"), regret_svg(r));
    for (const auto& curve : r.curves)
        std::cout << curve.label << ": mean R(K) = " << curve.mean.back() << " +- "
                  << curve.std_error.back() << "\n";
    return kOk;
}

int cmd_verify(const Common& c, const std::string& what, const std::string& kind, bool quick) {
    VerifyOptions o;
    if (c.seed) o.seed = *c.seed;
    o.quick = quick;
    if (what == "concentration") {
        CoverageReport rep;
        if (kind == "self-normalized") {
            SelfNormalizedConfig cfg;
            cfg.seed = o.seed;
            if (quick) cfg.n_trials = 200;
            rep = simulate_self_normalized(cfg);
        } else if (kind == "estimator") {
            RunConfig bench = c.config.empty() ? benchmark_config() : load_run_config(c.config);
            EstimatorCoverageConfig cfg;
            cfg.instance = build_nonlds(bench);
            cfg.constants = resolve_constants(bench);
            cfg.lambda = bench.lambda > 0 ? bench.lambda : 1.0 / std::pow(cfg.constants.B_star, 2);
            cfg.delta = bench.delta;
            cfg.scaling = parse_width_scaling(bench.beta_scaling);
            cfg.trials = quick ? 100 : 500;
            cfg.seed = o.seed;
            rep = simulate_estimator_coverage(cfg);
        } else {
            throw ConfigError("verify concentration: --kind must be self-normalized or estimator");
        }
        const json j{{"trials", rep.trials}, {"delta", rep.delta}, {"coverage", rep.coverage},
                     {"min_margin", rep.min_margin}};
        write_text(out_path(c, "concentration.json"), j.dump(2) + "\n");
        std::cout << j.dump(2) << "\n";
        return rep.coverage < 1.0 - rep.delta - 0.03 ? kCheckFailed : kOk;
    }
    if (what != "all") throw ConfigError("verify: expected 'all' or 'concentration'");
    const VerificationReport rep = verify_all(o);
    write_text(out_path(c, "verification.json"), rep.to_json().dump(2) + "\n");
    for (const auto& ch : rep.checks)
        std::cout << (ch.passed ? "PASS " : "FAIL ") << ch.name << "  " << ch.detail << "\n";
    return rep.passed() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"score-matching model-based RL lab"};
    app.require_subcommand(1);

    Common common;
    std::string data_path;
    auto* est = app.add_subcommand("estimate", "fit W_hat to a transition CSV");
    add_common(est, common);
    est->add_option("--data", data_path, "CSV with columns s..., a, s_next...")->required();

    auto* plan = app.add_subcommand("plan", "dynamic programming under the configured W0");
    add_common(plan, common);

    auto* run = app.add_subcommand("run", "one optimistic learning run");
    add_common(run, common);

    int seeds = 10;
    bool with_oracle = false, svg = false;
    auto* sweep = app.add_subcommand("sweep", "seed sweep with mean and stderr regret curves");
    add_common(sweep, common);
    sweep->add_option("--seeds", seeds, "number of seeds")->capture_default_str();
    sweep->add_flag("--oracle", with_oracle, "also sweep the oracle (set = {W0}) variant");
    sweep->add_flag("--svg", svg, "write regret.svg");

    std::string what = "all", kind = "self-normalized";
    bool quick = false;
    auto* verify = app.add_subcommand("verify", "verification suite");
    add_common(verify, common);
    verify->add_option("what", what, "all | concentration")->capture_default_str();
    verify->add_option("--kind", kind, "concentration experiment: self-normalized | estimator")
        ->capture_default_str();
    verify->add_flag("--quick", quick, "reduced trial counts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*est) return cmd_estimate(common, data_path);
        if (*plan) return cmd_plan(common);
        if (*run) return cmd_run(common);
        if (*sweep) return cmd_sweep(common, seeds, with_oracle, svg);
        if (*verify) return cmd_verify(common, what, kind, quick);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << " (condition estimate " << e.condition_estimate()
                  << ")\n";
        return kNumericalError;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kNumericalError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    return kOk;
}
