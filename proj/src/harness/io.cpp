#include <cstdio>
#include <fstream>
#include <sstream>

#include "smrl/errors.hpp"
#include "smrl/harness.hpp"

namespace smrl {

namespace {

// Shortest round-trip representation, identical across runs.
std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<double> row_major(const Mat& m) {
    std::vector<double> out;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
    return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(tok);
    return out;
}

}  // namespace

std::string episodes_csv(const RunLog& log) {
    std::ostringstream os;
    const int ds = log.episodes.empty() ? 1 : static_cast<int>(log.episodes[0].s1.size());
    os << "k,";
    if (ds == 1) {
        os << "s1,";
    } else {
        for (int i = 0; i < ds; ++i) os << "s1_" << i << ",";
    }
    os << "optimistic_value,realized_return,v_star,v_pi,regret_k,cum_regret,beta_k,gamma_k\n";
    for (const auto& e : log.episodes) {
        os << e.k << ",";
        for (int i = 0; i < ds; ++i) os << num(e.s1(i)) << ",";
        os << num(e.optimistic_value) << "," << num(e.realized_return) << "," << num(e.v_star)
           << "," << num(e.v_pi) << "," << num(e.regret_k) << "," << num(e.cum_regret) << ","
           << num(e.beta_k) << "," << num(e.gamma_k) << "\n";
    }
    return os.str();
}

json run_summary(const RunConfig& cfg, const RunLog& log) {
    const double K = static_cast<double>(log.episodes.size());
    int rejected = 0, dropped = 0;
    for (const auto& e : log.episodes) {
        rejected += e.candidates_rejected;
        dropped += e.candidates_dropped;
    }
    return json{{"config", to_json(cfg)},
                {"episodes", log.episodes.size()},
                {"lambda", log.lambda},
                {"cum_regret", log.cum_regret},
                {"mean_regret", K > 0 ? log.cum_regret / K : 0.0},
                {"epsilon_grid", log.epsilon_grid},
                {"gamma_final", log.gamma_final},
                {"elliptical_sum", log.elliptical_sum},
                {"truth_in_set_episodes", log.truth_in_set_count},
                {"candidates_rejected", rejected},
                {"candidates_dropped", dropped},
                {"W_hat_final", row_major(log.W_hat_final)}};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<Transition> read_transitions_csv(const std::string& path, int d_s) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset '" + path + "'");
    std::vector<Transition> data;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tok = split(line, ',');
        if (static_cast<int>(tok.size()) != 2 * d_s + 1)
            throw ConfigError("dataset line " + std::to_string(lineno) + ": expected " +
                              std::to_string(2 * d_s + 1) + " columns");
        try {
            Transition t;
            t.s.resize(d_s);
            t.s_next.resize(d_s);
            for (int i = 0; i < d_s; ++i) t.s(i) = std::stod(tok[i]);
            t.a = std::stoi(tok[d_s]);
            for (int i = 0; i < d_s; ++i) t.s_next(i) = std::stod(tok[d_s + 1 + i]);
            data.push_back(std::move(t));
        } catch (const std::exception&) {
            if (lineno == 1) continue;  // header
            throw ConfigError("dataset line " + std::to_string(lineno) + ": not numeric");
        }
    }
    return data;
}

json estimate_json(const Estimate& est, std::size_t n) {
    return json{{"W_hat", row_major(est.W_hat)},
                {"shape", {est.W_hat.rows(), est.W_hat.cols()}},
                {"lambda", est.lambda},
                {"n", n},
                {"residual_norm", est.residual_norm}};
}

std::string value_table_csv(const PlannerResult& plan, const StateGrid& grid) {
    std::ostringstream os;
    os << "h,cell";
    for (int i = 0; i < grid.dim(); ++i) os << ",center_" << i;
    os << ",V\n";
    for (int h = 0; h <= plan.horizon; ++h)
        for (int c = 0; c < plan.num_cells; ++c) {
            os << h + 1 << "," << c;
            const Vec x = grid.center(c);
            for (int i = 0; i < grid.dim(); ++i) os << "," << num(x(i));
            os << "," << num(plan.value(h, c)) << "\n";
        }
    return os.str();
}

std::string q_table_csv(const PlannerResult& plan, const StateGrid& grid) {
    std::ostringstream os;
    os << "h,cell";
    for (int i = 0; i < grid.dim(); ++i) os << ",center_" << i;
    os << ",a,Q\n";
    for (int h = 0; h < plan.horizon; ++h)
        for (int c = 0; c < plan.num_cells; ++c) {
            const Vec x = grid.center(c);
            for (int a = 0; a < plan.num_actions; ++a) {
                os << h + 1 << "," << c;
                for (int i = 0; i < grid.dim(); ++i) os << "," << num(x(i));
                os << "," << a << "," << num(plan.q(h, c, a)) << "\n";
            }
        }
    return os.str();
}

json policy_json(const PlannerResult& plan, const StateGrid& grid) {
    json centers = json::array();
    for (int c = 0; c < grid.num_cells(); ++c) {
        const Vec x = grid.center(c);
        centers.push_back(std::vector<double>(x.data(), x.data() + x.size()));
    }
    json table = json::array();
    for (int h = 0; h < plan.horizon; ++h) {
        std::vector<int> row(static_cast<std::size_t>(plan.num_cells));
        for (int c = 0; c < plan.num_cells; ++c) row[c] = plan.policy.at(h, c);
        table.push_back(row);
    }
    return json{{"horizon", plan.horizon}, {"cells", plan.num_cells}, {"centers", centers},
                {"policy", table}, {"model_used", row_major(plan.model_used)}};
}

}  // namespace smrl
