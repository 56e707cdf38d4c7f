#include "terracal/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "terracal/io.hpp"

namespace terracal::calib {

void PriorSpec::validate() const {
    if (names.size() != lo.size() || names.size() != hi.size() || names.empty())
        throw std::invalid_argument("prior: inconsistent or empty bounds");
    for (std::size_t j = 0; j < lo.size(); ++j)
        if (!(lo[j] < hi[j]))
            throw std::invalid_argument("prior: need lo < hi for parameter " + names[j]);
}

std::vector<double> PriorSpec::midpoint() const {
    std::vector<double> m(dim());
    for (std::size_t j = 0; j < dim(); ++j) m[j] = 0.5 * (lo[j] + hi[j]);
    return m;
}

bool PriorSpec::contains(const std::vector<double>& x) const {
    for (std::size_t j = 0; j < dim(); ++j)
        if (x[j] < lo[j] || x[j] > hi[j]) return false;
    return true;
}

Chain mh_sample(const std::function<double(const std::vector<double>&)>& log_target,
                const PriorSpec& prior, const ChainConfig& config) {
    prior.validate();
    if (config.iterations <= 0) throw std::invalid_argument("mh: iterations must be > 0");
    const std::size_t burn = static_cast<std::size_t>(config.iterations * config.burn_in_fraction);
    if (static_cast<long>(burn) >= config.iterations)
        throw std::invalid_argument("mh: burn-in must leave samples");

    const std::size_t dim = prior.dim();
    std::vector<double> x = config.init ? *config.init : prior.midpoint();
    if (x.size() != dim) throw std::invalid_argument("mh: init point dimension mismatch");
    if (!prior.contains(x)) throw std::invalid_argument("mh: init point outside the prior");
    double lp = log_target(x);
    if (!std::isfinite(lp)) throw std::invalid_argument("mh: log target non-finite at the initial point");

    std::vector<double> step(dim);
    for (std::size_t j = 0; j < dim; ++j) step[j] = config.step_fraction * (prior.hi[j] - prior.lo[j]);

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Chain chain;
    chain.dim = dim;
    chain.burn_in = burn;
    chain.samples.reserve(config.iterations * dim);
    chain.log_post.reserve(config.iterations);

    std::vector<double> prop(dim);
    long accepted = 0;
    int window_accepted = 0;
    constexpr int kAdaptWindow = 100;

    for (long it = 0; it < config.iterations; ++it) {
        for (std::size_t j = 0; j < dim; ++j) prop[j] = x[j] + step[j] * gauss(rng);
        bool accept = false;
        if (prior.contains(prop)) {
            const double lpp = log_target(prop);
            const double u = unif(rng);
            accept = std::log(u) < lpp - lp;
            if (accept) {
                x = prop;
                lp = lpp;
            }
        }
        if (accept) {
            ++accepted;
            ++window_accepted;
        }
        chain.samples.insert(chain.samples.end(), x.begin(), x.end());
        chain.log_post.push_back(lp);

        if (config.adapt && static_cast<std::size_t>(it) < burn && (it + 1) % kAdaptWindow == 0) {
            const double rate = static_cast<double>(window_accepted) / kAdaptWindow;
            window_accepted = 0;
            double scale = 1.0;
            if (rate < 0.2) scale = 0.8;
            else if (rate > 0.4) scale = 1.25;
            for (double& s : step) s *= scale;
        }
    }
    chain.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(config.iterations);
    return chain;
}

std::vector<double> gelman_rubin(const std::vector<Chain>& chains) {
    if (chains.size() < 2) throw std::invalid_argument("gelman_rubin: need >= 2 chains");
    const std::size_t dim = chains[0].dim;
    const std::size_t len = chains[0].post_burn_length();
    for (const Chain& c : chains)
        if (c.dim != dim || c.post_burn_length() != len)
            throw std::invalid_argument("gelman_rubin: chains must have equal shape");
    if (len < 4) throw std::invalid_argument("gelman_rubin: post-burn-in length must be >= 4");

    // duplicated chains carry no between-chain information: define R-hat as 1
    // (the split statistic would otherwise report their shared within-chain drift)
    bool all_identical = true;
    for (std::size_t c = 1; all_identical && c < chains.size(); ++c)
        all_identical = chains[c].samples == chains[0].samples;
    if (all_identical) return std::vector<double>(dim, 1.0);

    const std::size_t half = len / 2;  // split each chain in two
    std::vector<double> rhat(dim);
    std::vector<double> means, vars;
    for (std::size_t j = 0; j < dim; ++j) {
        means.clear();
        vars.clear();
        for (const Chain& c : chains) {
            for (int s = 0; s < 2; ++s) {
                const std::size_t begin = c.burn_in + s * half;
                double mean = 0.0;
                for (std::size_t k = 0; k < half; ++k) mean += c.at(begin + k, j);
                mean /= static_cast<double>(half);
                double var = 0.0;
                for (std::size_t k = 0; k < half; ++k) {
                    const double d = c.at(begin + k, j) - mean;
                    var += d * d;
                }
                var /= static_cast<double>(half - 1);
                means.push_back(mean);
                vars.push_back(var);
            }
        }
        const std::size_t m = means.size();
        double grand = 0.0;
        for (double v : means) grand += v;
        grand /= static_cast<double>(m);
        double b = 0.0;  // n * variance of the split means
        for (double v : means) b += (v - grand) * (v - grand);
        b *= static_cast<double>(half) / static_cast<double>(m - 1);
        double w = 0.0;
        for (double v : vars) w += v;
        w /= static_cast<double>(m);

        const double n = static_cast<double>(half);
        if (b == 0.0) rhat[j] = 1.0;
        else if (w == 0.0) rhat[j] = std::numeric_limits<double>::infinity();
        else rhat[j] = std::max(1.0, std::sqrt(((n - 1.0) / n * w + b / n) / w));
    }
    return rhat;
}

std::string chains_csv(const std::vector<Chain>& chains, const std::vector<std::string>& names) {
    std::string out = "chain,iter";
    for (const std::string& n : names) out += ',' + n;
    out += ",logpost\n";
    using io::format_double;
    for (std::size_t c = 0; c < chains.size(); ++c) {
        const Chain& ch = chains[c];
        for (std::size_t it = 0; it < ch.length(); ++it) {
            out += std::to_string(c) + ',' + std::to_string(it);
            for (std::size_t j = 0; j < ch.dim; ++j) out += ',' + format_double(ch.at(it, j));
            out += ',' + format_double(ch.log_post[it]) + '\n';
        }
    }
    return out;
}

}  // namespace terracal::calib
