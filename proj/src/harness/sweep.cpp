#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "smrl/errors.hpp"
#include "smrl/harness.hpp"
#include "smrl/parallel.hpp"

namespace smrl {

GrowthFit fit_growth(const std::vector<double>& curve) {
    GrowthFit f;
    double ss = 0.0, sl = 0.0, ks = 0.0, kl = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const double k = static_cast<double>(i + 1);
        ss += curve[i] * std::sqrt(k);
        ks += k;
        sl += curve[i] * k;
        kl += k * k;
    }
    if (curve.empty()) return f;
    f.c_sqrt = ss / ks;
    f.c_lin = sl / kl;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const double k = static_cast<double>(i + 1);
        f.resid_sqrt += std::pow(curve[i] - f.c_sqrt * std::sqrt(k), 2);
        f.resid_lin += std::pow(curve[i] - f.c_lin * k, 2);
    }
    return f;
}

SweepResult run_sweep(const std::vector<SweepVariant>& variants, int n_seeds,
                      std::uint64_t base_seed) {
    if (n_seeds < 1) throw ArgumentError("sweep: need at least one seed");
    const std::size_t V = variants.size(), S = static_cast<std::size_t>(n_seeds);
    SweepResult r;
    r.logs.assign(V, std::vector<RunLog>(S));
    parallel_for(V * S, [&](std::size_t idx) {
        const std::size_t v = idx / S, s = idx % S;
        RunConfig c = variants[v].config;
        c.seed = base_seed + s;
        r.logs[v][s] = run_smrl(build_smrl_config(c));
    });
    for (std::size_t v = 0; v < V; ++v) {
        SweepCurve curve;
        curve.label = variants[v].label;
        curve.seeds = n_seeds;
        const std::size_t K = r.logs[v][0].episodes.size();
        for (std::size_t k = 0; k < K; ++k) {
            double sum = 0.0, sq = 0.0;
            for (std::size_t s = 0; s < S; ++s) {
                const double x = r.logs[v][s].episodes[k].cum_regret;
                sum += x;
                sq += x * x;
            }
            const double mean = sum / S;
            const double var = S > 1 ? std::max(0.0, (sq - S * mean * mean) / (S - 1)) : 0.0;
            curve.mean.push_back(mean);
            curve.std_error.push_back(std::sqrt(var / S));
        }
        r.curves.push_back(std::move(curve));
    }
    return r;
}

std::string sweep_csv(const SweepResult& r) {
    std::ostringstream os;
    os << "variant,k,mean_cum_regret,stderr_cum_regret,seeds\n";
    char buf[64];
    for (const auto& c : r.curves)
        for (std::size_t k = 0; k < c.mean.size(); ++k) {
            os << c.label << "," << k + 1 << ",";
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", c.mean[k], c.std_error[k]);
            os << buf << "," << c.seeds << "\n";
        }
    return os.str();
}

std::string regret_svg(const SweepResult& r) {
    const double W = 640, Hpx = 400, m = 50;
    double ymax = 1e-12;
    std::size_t kmax = 1;
    for (const auto& c : r.curves) {
        kmax = std::max(kmax, c.mean.size());
        for (std::size_t k = 0; k < c.mean.size(); ++k) ymax = std::max(ymax, c.mean[k] + c.std_error[k]);
    }
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream os;
    char buf[128];
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hpx << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << m << "\" y1=\"" << Hpx - m << "\" x2=\"" << W - m << "\" y2=\"" << Hpx - m
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << m << "\" y1=\"" << m << "\" x2=\"" << m << "\" y2=\"" << Hpx - m
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << Hpx - 10 << "\" text-anchor=\"middle\">episode k</text>\n";
    std::snprintf(buf, sizeof buf, "%.3g", ymax);
    os << "<text x=\"5\" y=\"" << m << "\">" << buf << "</text>\n";
    os << "<text x=\"5\" y=\"" << Hpx / 2 << "\">R(k)</text>\n";
    for (std::size_t i = 0; i < r.curves.size(); ++i) {
        const auto& c = r.curves[i];
        os << "<polyline fill=\"none\" stroke=\"" << colors[i % 6] << "\" points=\"";
        for (std::size_t k = 0; k < c.mean.size(); ++k) {
            const double x = m + (W - 2 * m) * static_cast<double>(k + 1) / kmax;
            const double y = Hpx - m - (Hpx - 2 * m) * c.mean[k] / ymax;
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x, y);
            os << buf;
        }
        os << "\"/>\n";
        os << "<text x=\"" << W - m - 120 << "\" y=\"" << m + 18 * i << "\" fill=\"" << colors[i % 6]
           << "\">" << c.label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace smrl
