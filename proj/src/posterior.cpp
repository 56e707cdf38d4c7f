#include "terracal/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "terracal/io.hpp"

namespace terracal::calib {

KdeCurve gaussian_kde(const std::vector<double>& samples, int grid_points) {
    if (samples.empty()) throw std::invalid_argument("kde: no samples");
    KdeCurve curve;
    const std::size_t n = samples.size();
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n > 1 ? n - 1 : 1);
    const double sd = std::sqrt(var);

    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const double iqr = sorted[static_cast<std::size_t>(0.75 * (n - 1))] -
                       sorted[static_cast<std::size_t>(0.25 * (n - 1))];

    // Silverman's rule
    double spread = sd;
    if (iqr > 0) spread = std::min(sd, iqr / 1.34);
    const double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);

    curve.x.resize(grid_points);
    curve.density.assign(grid_points, 0.0);

    if (h <= 0.0) {
        // degenerate sample: represent the spike as one full-mass grid cell
        const double v = sorted.front();
        const double lo = v - 1.0, hi = v + 1.0;
        const double dx = (hi - lo) / (grid_points - 1);
        for (int g = 0; g < grid_points; ++g) curve.x[g] = lo + g * dx;
        curve.density[grid_points / 2] = 1.0 / dx;
        return curve;
    }

    const double lo = sorted.front() - 4.0 * h;
    const double hi = sorted.back() + 4.0 * h;
    const double dx = (hi - lo) / (grid_points - 1);
    for (int g = 0; g < grid_points; ++g) curve.x[g] = lo + g * dx;

    // linear binning onto the grid, then one Gaussian pass per grid node
    std::vector<double> weight(grid_points, 0.0);
    for (double v : samples) {
        const double u = (v - lo) / dx;
        const int g0 = std::clamp(static_cast<int>(u), 0, grid_points - 2);
        const double frac = std::clamp(u - g0, 0.0, 1.0);
        weight[g0] += 1.0 - frac;
        weight[g0 + 1] += frac;
    }
    const double norm = 1.0 / (static_cast<double>(n) * h * std::sqrt(2.0 * std::numbers::pi));
    const int reach = std::min(grid_points - 1, static_cast<int>(8.0 * h / dx) + 1);
    for (int b = 0; b < grid_points; ++b) {
        if (weight[b] == 0.0) continue;
        const int g0 = std::max(0, b - reach), g1 = std::min(grid_points - 1, b + reach);
        for (int g = g0; g <= g1; ++g) {
            const double d = (curve.x[g] - curve.x[b]) / h;
            curve.density[g] += weight[b] * norm * std::exp(-0.5 * d * d);
        }
    }
    return curve;
}

PosteriorSummary posterior_summary(const std::vector<Chain>& chains,
                                   const std::vector<std::string>& names) {
    if (chains.empty()) throw std::invalid_argument("posterior: no chains");
    const std::size_t dim = chains[0].dim;
    if (names.size() != dim) throw std::invalid_argument("posterior: name count mismatch");

    PosteriorSummary summary;
    summary.r_hat_available = chains.size() >= 2;
    std::vector<double> rhat(dim, 1.0);
    if (summary.r_hat_available) rhat = gelman_rubin(chains);

    std::vector<double> pooled;
    for (std::size_t j = 0; j < dim; ++j) {
        pooled.clear();
        for (const Chain& c : chains)
            for (std::size_t k = c.burn_in; k < c.length(); ++k) pooled.push_back(c.at(k, j));
        ParamSummary ps;
        ps.name = names[j];
        double mean = 0.0;
        for (double v : pooled) mean += v;
        mean /= static_cast<double>(pooled.size());
        double var = 0.0;
        for (double v : pooled) var += (v - mean) * (v - mean);
        ps.mean = mean;
        ps.sd = pooled.size() > 1 ? std::sqrt(var / static_cast<double>(pooled.size() - 1)) : 0.0;
        ps.r_hat = rhat[j];
        ps.kde = gaussian_kde(pooled);
        if (ps.r_hat > 1.1) summary.r_hat_warning = true;
        summary.params.push_back(std::move(ps));
    }

    // MAP over the pooled post-burn-in samples
    double best = -std::numeric_limits<double>::infinity();
    const Chain* best_chain = nullptr;
    std::size_t best_iter = 0;
    for (const Chain& c : chains)
        for (std::size_t k = c.burn_in; k < c.length(); ++k)
            if (c.log_post[k] > best) {
                best = c.log_post[k];
                best_chain = &c;
                best_iter = k;
            }
    summary.map_log_post = best;
    for (std::size_t j = 0; j < dim; ++j) summary.map_sample.push_back(best_chain->at(best_iter, j));
    return summary;
}

double PosteriorSummary::mean_of(const std::string& name) const {
    for (const ParamSummary& p : params)
        if (p.name == name) return p.mean;
    throw std::invalid_argument("posterior: unknown parameter " + name);
}

std::string PosteriorSummary::to_text() const {
    using io::format_double;
    std::string out = "{\n";
    for (const ParamSummary& p : params) {
        out += "  \"" + p.name + "\": {\"mean\": " + format_double(p.mean) +
               ", \"sd\": " + format_double(p.sd) + ", \"r_hat\": ";
        out += r_hat_available ? format_double(p.r_hat) : std::string("\"n/a (single chain)\"");
        out += "},\n";
    }
    out += "  \"map\": [";
    for (std::size_t j = 0; j < map_sample.size(); ++j)
        out += (j ? ", " : "") + format_double(map_sample[j]);
    out += "],\n  \"map_log_post\": " + format_double(map_log_post) + ",\n";
    out += std::string("  \"r_hat_warning\": ") + (r_hat_warning ? "true" : "false") + "\n}\n";
    return out;
}

std::string PosteriorSummary::kde_csv() const {
    using io::format_double;
    std::string out = "param,x,density\n";
    for (const ParamSummary& p : params)
        for (std::size_t g = 0; g < p.kde.x.size(); ++g)
            out += p.name + ',' + format_double(p.kde.x[g]) + ',' + format_double(p.kde.density[g]) + '\n';
    return out;
}

}  // namespace terracal::calib
