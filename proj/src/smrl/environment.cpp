#include <random>

#include "smrl/driver.hpp"
#include "smrl/errors.hpp"
#include "smrl/quadrature.hpp"

namespace smrl {

Environment::Environment(ExpFamilyModel truth, StateGrid grid, int quad_intervals)
    : truth_(std::move(truth)), grid_(std::move(grid)), quad_intervals_(quad_intervals) {
    truth_.validate();
    if (truth_.family != Family::Gaussian && truth_.state_dim() != 1)
        throw UnsupportedDimension("environment: non-Gaussian models are simulated for d_s = 1 only");
    table_ = build_transition_table(truth_, truth_.W, grid_, quad_intervals_);
}

Environment::Step Environment::step(const Vec& s, int a, Rng& rng) const {
    Step out;
    if (truth_.family == Family::Gaussian) {
        const Vec mu = truth_.W * truth_.features(s, a);
        out.raw = mu + truth_.sigma * standard_normal(rng, mu.size());
    } else {
        const GridDensity g =
            grid_density(truth_, truth_.W, s, a, grid_.cells_on_axis(0) * quad_intervals_);
        out.raw = Vec::Constant(1, sample_inverse_cdf_1d(g, rng));
    }
    out.cell = grid_.cell_of(grid_.box().clip(out.raw));
    out.state = grid_.center(out.cell);
    return out;
}

double Environment::rollout(const Policy& policy, const RewardFn& reward, const Vec& s1,
                            Rng& rng) const {
    Vec s = snap(s1);
    double ret = 0.0;
    for (int h = 0; h < policy.horizon; ++h) {
        const int a = policy.at(h, grid_.cell_of(s));
        ret += reward(s, truth_.actions[a]);
        s = step(s, a, rng).state;
    }
    return ret;
}

AdversaryKind parse_adversary(const std::string& s) {
    if (s == "fixed") return AdversaryKind::Fixed;
    if (s == "round-robin") return AdversaryKind::RoundRobin;
    if (s == "uniform") return AdversaryKind::Uniform;
    throw ConfigError("unknown adversary preset '" + s + "' (fixed, round-robin, uniform)");
}

std::string to_string(AdversaryKind k) {
    switch (k) {
        case AdversaryKind::Fixed: return "fixed";
        case AdversaryKind::RoundRobin: return "round-robin";
        case AdversaryKind::Uniform: return "uniform";
    }
    return "fixed";
}

Vec initial_state(const AdversaryConfig& adv, const StateGrid& grid, int k, std::uint64_t seed) {
    const Box& box = grid.box();
    const int d = grid.dim();
    Vec s(d);
    switch (adv.kind) {
        case AdversaryKind::Fixed:
            if (adv.fixed_state.size() == 0) {
                s = 0.5 * (box.lo + box.hi);
            } else {
                if (adv.fixed_state.size() != d) throw ShapeError("adversary: fixed state dimension");
                s = adv.fixed_state;
            }
            break;
        case AdversaryKind::RoundRobin: {
            const unsigned corner = static_cast<unsigned>(k - 1) % (1u << d);
            for (int i = 0; i < d; ++i) s(i) = (corner >> i) & 1u ? box.hi(i) : box.lo(i);
            break;
        }
        case AdversaryKind::Uniform: {
            Rng rng = make_stream(seed, static_cast<std::uint64_t>(k), 0, stream::kAdversary);
            for (int i = 0; i < d; ++i)
                s(i) = std::uniform_real_distribution<double>(box.lo(i), box.hi(i))(rng);
            break;
        }
    }
    return grid.center(grid.cell_of(s));
}

}  // namespace smrl
