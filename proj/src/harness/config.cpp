#include <fstream>
#include <set>
#include <sstream>

#include "smrl/errors.hpp"
#include "smrl/harness.hpp"

namespace smrl {

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("key '") + key + "': " + e.what());
    }
}

std::vector<double> number_list(const json& j, const std::string& what) {
    if (j.is_number()) return {j.get<double>()};
    if (!j.is_array()) throw ConfigError(what + ": expected a number or an array of numbers");
    std::vector<double> out;
    for (const auto& x : j) {
        if (!x.is_number()) throw ConfigError(what + ": expected numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

RewardSpec parse_reward(const json& j) {
    RewardSpec r;
    if (j.is_string()) {
        r.preset = j.get<std::string>();
    } else if (j.is_object()) {
        reject_unknown(j, {"preset", "target", "scale", "action_cost"}, "reward");
        r.preset = get_or<std::string>(j, "preset", r.preset);
        if (j.contains("target")) r.target = number_list(j["target"], "reward.target");
        r.scale = get_or(j, "scale", r.scale);
        r.action_cost = get_or(j, "action_cost", r.action_cost);
    } else {
        throw ConfigError("reward: expected a preset name or an object");
    }
    if (r.preset != "quadratic-target" && r.preset != "zero")
        throw ConfigError("reward: unknown preset '" + r.preset + "' (quadratic-target, zero)");
    if (!(r.scale > 0.0)) throw ConfigError("reward: scale must be > 0");
    if (r.action_cost < 0.0) throw ConfigError("reward: action_cost must be >= 0");
    return r;
}

json reward_to_json(const RewardSpec& r) {
    return json{{"preset", r.preset}, {"target", r.target}, {"scale", r.scale},
                {"action_cost", r.action_cost}};
}

ModelSpec parse_model(const json& j, RewardSpec* reward_out) {
    if (!j.is_object()) throw ConfigError("model: expected an object");
    reject_unknown(j, {"kind", "d_s", "d_phi", "sigma", "degree", "W0", "clip_box", "actions", "phi",
                       "reward"},
                   "model");
    ModelSpec m;
    m.kind = get_or<std::string>(j, "kind", m.kind);
    if (m.kind != "nonlds" && m.kind != "custom-poly")
        throw ConfigError("model.kind: expected nonlds or custom-poly, got '" + m.kind + "'");
    m.d_s = get_or(j, "d_s", m.d_s);
    m.d_phi = get_or(j, "d_phi", m.d_phi);
    m.sigma = get_or(j, "sigma", m.sigma);
    m.degree = get_or(j, "degree", m.degree);
    m.phi = get_or<std::string>(j, "phi", m.phi);
    if (m.d_s < 1 || m.d_phi < 1) throw ConfigError("model: d_s and d_phi must be >= 1");
    if (!(m.sigma > 0.0)) throw ConfigError("model.sigma must be > 0");
    if (m.kind == "custom-poly" && (m.d_s != 1 || m.degree < 1))
        throw ConfigError("model: custom-poly needs d_s = 1 and degree >= 1");

    if (!j.contains("W0")) throw ConfigError("model.W0 is required");
    const json& w = j["W0"];
    if (w.is_array() && !w.empty() && w[0].is_array()) {
        for (const auto& row : w) {
            const auto r = number_list(row, "model.W0");
            m.W0.insert(m.W0.end(), r.begin(), r.end());
        }
    } else {
        m.W0 = number_list(w, "model.W0");
    }
    if (static_cast<int>(m.W0.size()) != m.psi_dim() * m.d_phi)
        throw ConfigError("model.W0: expected " + std::to_string(m.psi_dim() * m.d_phi) +
                          " entries (d_psi x d_phi, row-major)");

    if (!j.contains("clip_box")) throw ConfigError("model.clip_box is required");
    const json& box = j["clip_box"];
    if (!box.is_object() || !box.contains("lo") || !box.contains("hi"))
        throw ConfigError("model.clip_box: expected {\"lo\": [...], \"hi\": [...]}");
    reject_unknown(box, {"lo", "hi"}, "model.clip_box");
    m.clip_lo = number_list(box["lo"], "model.clip_box.lo");
    m.clip_hi = number_list(box["hi"], "model.clip_box.hi");
    if (static_cast<int>(m.clip_lo.size()) != m.d_s || static_cast<int>(m.clip_hi.size()) != m.d_s)
        throw ConfigError("model.clip_box: lo and hi need d_s entries");
    for (int i = 0; i < m.d_s; ++i)
        if (!(m.clip_lo[i] < m.clip_hi[i])) throw ConfigError("model.clip_box: need lo < hi");

    if (!j.contains("actions") || !j["actions"].is_array() || j["actions"].empty())
        throw ConfigError("model.actions: expected a non-empty array");
    for (const auto& a : j["actions"]) m.actions.push_back(number_list(a, "model.actions"));
    for (const auto& a : m.actions)
        if (a.size() != m.actions[0].size()) throw ConfigError("model.actions: ragged action vectors");

    if (j.contains("reward") && reward_out) *reward_out = parse_reward(j["reward"]);
    return m;
}

json model_to_json(const ModelSpec& m) {
    json j{{"kind", m.kind}, {"d_s", m.d_s},       {"d_phi", m.d_phi}, {"sigma", m.sigma},
           {"W0", m.W0},     {"clip_box", {{"lo", m.clip_lo}, {"hi", m.clip_hi}}},
           {"actions", m.actions}, {"phi", m.phi}};
    if (m.kind == "custom-poly") j["degree"] = m.degree;
    return j;
}

}  // namespace

RunConfig benchmark_config() {
    RunConfig c;
    c.model.kind = "nonlds";
    c.model.d_s = 1;
    c.model.d_phi = 2;
    c.model.sigma = 0.3;
    c.model.W0 = {1.2, 0.8};
    c.model.clip_lo = {-2.5};
    c.model.clip_hi = {2.5};
    c.model.actions = {{-1.0}, {-0.5}, {0.0}, {0.5}, {1.0}};
    c.model.phi = "tanh";
    c.grid_cells = {51};
    c.constants_auto = true;
    c.constants.B_star = 1.5;
    c.delta = 0.1;
    c.K = 200;
    c.H = 5;
    c.n_candidates = 16;
    c.seed = 0;
    c.adversary = "fixed";
    c.adversary_state = {-1.5};
    c.reward.preset = "quadratic-target";
    c.reward.target = {1.5};
    c.reward.scale = 1.0;
    return c;
}

RunConfig parse_run_config(const json& j) {
    if (!j.is_object()) throw ConfigError("run config: expected a JSON object");
    reject_unknown(j, {"model", "grid", "constants", "lambda", "delta", "K", "H", "n_candidates", "seed",
                       "adversary", "reward", "beta_scaling", "oracle", "quad_intervals"},
                   "run config");
    RunConfig c;
    if (!j.contains("model")) throw ConfigError("run config: 'model' is required");
    RewardSpec model_reward;
    bool model_has_reward = j["model"].is_object() && j["model"].contains("reward");
    c.model = parse_model(j["model"], &model_reward);
    if (j.contains("reward"))
        c.reward = parse_reward(j["reward"]);
    else if (model_has_reward)
        c.reward = model_reward;

    if (j.contains("grid")) {
        const json& g = j["grid"];
        if (g.is_number_integer()) {
            c.grid_cells = {g.get<int>()};
        } else if (g.is_object()) {
            reject_unknown(g, {"cells"}, "grid");
            const json& cells = g.at("cells");
            c.grid_cells.clear();
            if (cells.is_number_integer()) {
                c.grid_cells.push_back(cells.get<int>());
            } else if (cells.is_array()) {
                for (const auto& x : cells) c.grid_cells.push_back(x.get<int>());
            } else {
                throw ConfigError("grid.cells: expected an integer or an array of integers");
            }
        } else {
            throw ConfigError("grid: expected {\"cells\": n}");
        }
    }
    if (c.grid_cells.size() != 1 && static_cast<int>(c.grid_cells.size()) != c.model.d_s)
        throw ConfigError("grid.cells: give one count or one per state axis");
    for (int n : c.grid_cells)
        if (n < 1) throw ConfigError("grid.cells: counts must be >= 1");

    if (j.contains("constants")) {
        const json& k = j["constants"];
        if (k.is_string()) {
            if (k.get<std::string>() != "auto") throw ConfigError("constants: expected \"auto\" or an object");
            c.constants_auto = true;
        } else if (k.is_object()) {
            reject_unknown(k, {"auto", "B_psi", "B_c", "alpha1", "alpha2", "kappa", "B_star"}, "constants");
            c.constants_auto = get_or(k, "auto", !(k.contains("alpha1") || k.contains("B_psi")));
            c.constants.B_psi = get_or(k, "B_psi", c.constants.B_psi);
            c.constants.B_c = get_or(k, "B_c", c.constants.B_c);
            c.constants.alpha1 = get_or(k, "alpha1", c.constants.alpha1);
            c.constants.alpha2 = get_or(k, "alpha2", c.constants.alpha2);
            c.constants.kappa = get_or(k, "kappa", c.constants.kappa);
            c.constants.B_star = get_or(k, "B_star", c.constants.B_star);
        } else {
            throw ConfigError("constants: expected \"auto\" or an object");
        }
    }
    if (c.constants_auto && c.model.kind != "nonlds")
        throw ConfigError("constants: automatic constants exist only for nonlds; supply them explicitly");
    if (!c.constants_auto) {
        try {
            c.constants.validate();
        } catch (const ArgumentError& e) {
            throw ConfigError(e.what());
        }
    }
    if (!(c.constants.B_star > 0.0)) throw ConfigError("constants.B_star must be > 0");

    if (j.contains("lambda")) {
        const json& l = j["lambda"];
        if (l.is_string() && l.get<std::string>() == "auto") {
            c.lambda = 0.0;
        } else if (l.is_number()) {
            c.lambda = l.get<double>();
            if (!(c.lambda > 0.0)) throw ConfigError("lambda must be > 0 (or \"auto\")");
        } else {
            throw ConfigError("lambda: expected a positive number or \"auto\"");
        }
    }
    c.delta = get_or(j, "delta", c.delta);
    if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    c.K = get_or(j, "K", c.K);
    c.H = get_or(j, "H", c.H);
    if (c.K < 1 || c.H < 1) throw ConfigError("K and H must be >= 1");
    c.n_candidates = get_or(j, "n_candidates", c.n_candidates);
    if (c.n_candidates < 1) throw ConfigError("n_candidates must be >= 1");
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.quad_intervals = get_or(j, "quad_intervals", c.quad_intervals);
    if (c.quad_intervals < 1) throw ConfigError("quad_intervals must be >= 1");
    c.oracle = get_or(j, "oracle", c.oracle);
    c.beta_scaling = get_or<std::string>(j, "beta_scaling", c.beta_scaling);
    parse_width_scaling(c.beta_scaling);

    if (j.contains("adversary")) {
        const json& a = j["adversary"];
        if (a.is_string()) {
            c.adversary = a.get<std::string>();
        } else if (a.is_object()) {
            reject_unknown(a, {"kind", "state"}, "adversary");
            c.adversary = get_or<std::string>(a, "kind", c.adversary);
            if (a.contains("state")) c.adversary_state = number_list(a["state"], "adversary.state");
        } else {
            throw ConfigError("adversary: expected a preset name or an object");
        }
    }
    parse_adversary(c.adversary);
    if (!c.adversary_state.empty() && static_cast<int>(c.adversary_state.size()) != c.model.d_s)
        throw ConfigError("adversary.state: expected d_s entries");
    if (!c.reward.target.empty() && static_cast<int>(c.reward.target.size()) != c.model.d_s)
        throw ConfigError("reward.target: expected d_s entries");

    // Surface model construction errors (feature dimension mismatches) at parse time.
    build_model(c.model);
    return c;
}

json to_json(const RunConfig& c) {
    json constants{{"auto", c.constants_auto}, {"B_psi", c.constants.B_psi},
                   {"B_c", c.constants.B_c},   {"alpha1", c.constants.alpha1},
                   {"alpha2", c.constants.alpha2}, {"kappa", c.constants.kappa},
                   {"B_star", c.constants.B_star}};
    json j{{"model", model_to_json(c.model)},
           {"grid", {{"cells", c.grid_cells}}},
           {"constants", constants},
           {"delta", c.delta},
           {"K", c.K},
           {"H", c.H},
           {"n_candidates", c.n_candidates},
           {"seed", c.seed},
           {"adversary", {{"kind", c.adversary}, {"state", c.adversary_state}}},
           {"reward", reward_to_json(c.reward)},
           {"beta_scaling", c.beta_scaling},
           {"oracle", c.oracle},
           {"quad_intervals", c.quad_intervals}};
    if (c.lambda > 0.0)
        j["lambda"] = c.lambda;
    else
        j["lambda"] = "auto";
    return j;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return parse_run_config(j);
}

ExpFamilyModel build_model(const ModelSpec& m) {
    const int da = static_cast<int>(m.actions.at(0).size());
    std::shared_ptr<const ActionFeatures> phi = make_action_features(m.phi, m.d_s, da);
    if (phi->dim() != m.d_phi)
        throw ConfigError("model: phi preset '" + m.phi + "' has dimension " +
                          std::to_string(phi->dim()) + ", d_phi says " + std::to_string(m.d_phi));
    const int dpsi = m.psi_dim();
    Mat W(dpsi, m.d_phi);
    for (int i = 0; i < dpsi; ++i)
        for (int k = 0; k < m.d_phi; ++k) W(i, k) = m.W0[static_cast<std::size_t>(i) * m.d_phi + k];
    const Box box(Eigen::Map<const Vec>(m.clip_lo.data(), m.d_s),
                  Eigen::Map<const Vec>(m.clip_hi.data(), m.d_s));
    std::vector<Vec> actions;
    for (const auto& a : m.actions) actions.push_back(Eigen::Map<const Vec>(a.data(), da));
    try {
        if (m.kind == "nonlds") return make_gaussian_model(W, m.sigma, box, actions, phi);
        return make_polynomial_model(m.degree, m.sigma, W, box, actions, phi);
    } catch (const ShapeError& e) {
        throw ConfigError(std::string("model: ") + e.what());
    } catch (const ArgumentError& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

RewardFn build_reward(const RewardSpec& r, int d_s) {
    if (r.preset == "zero") return RewardFn::zero(d_s);
    Vec target = r.target.empty() ? Vec::Zero(d_s) : Vec(Eigen::Map<const Vec>(r.target.data(), d_s));
    return RewardFn::quadratic_target(target, r.scale, r.action_cost);
}

NonLdsInstance build_nonlds(const RunConfig& c) {
    if (c.model.kind != "nonlds") throw ConfigError("expected a nonlds model");
    const ExpFamilyModel m = build_model(c.model);
    NonLdsInstance inst;
    inst.W0 = m.W;
    inst.sigma = m.sigma;
    inst.reward = build_reward(c.reward, c.model.d_s);
    inst.horizon = c.H;
    inst.clip_box = m.domain;
    inst.phi = m.phi;
    inst.actions = m.actions;
    return inst;
}

StructuralConstants resolve_constants(const RunConfig& c) {
    if (c.constants_auto) return StructuralConstants::nonlds(c.model.sigma, c.constants.B_star);
    return c.constants;
}

StateGrid build_grid(const RunConfig& c) {
    const Box box(Eigen::Map<const Vec>(c.model.clip_lo.data(), c.model.d_s),
                  Eigen::Map<const Vec>(c.model.clip_hi.data(), c.model.d_s));
    std::vector<int> cells = c.grid_cells;
    if (cells.size() == 1) cells.assign(static_cast<std::size_t>(c.model.d_s), cells[0]);
    return StateGrid(box, cells);
}

SmrlConfig build_smrl_config(const RunConfig& c) {
    SmrlConfig s;
    s.model = build_model(c.model);
    s.grid = build_grid(c);
    s.reward = build_reward(c.reward, c.model.d_s);
    s.constants = resolve_constants(c);
    s.lambda = c.lambda;
    s.delta = c.delta;
    s.K = c.K;
    s.H = c.H;
    s.n_candidates = c.n_candidates;
    s.seed = c.seed;
    s.adversary.kind = parse_adversary(c.adversary);
    if (!c.adversary_state.empty())
        s.adversary.fixed_state = Eigen::Map<const Vec>(c.adversary_state.data(), c.model.d_s);
    s.scaling = parse_width_scaling(c.beta_scaling);
    s.oracle = c.oracle;
    s.quad_intervals = c.quad_intervals;
    return s;
}

}  // namespace smrl
