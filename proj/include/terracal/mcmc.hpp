#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace terracal::calib {

// Per-parameter uniform bounds.
struct PriorSpec {
    std::vector<std::string> names;
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return names.size(); }
    void validate() const;
    std::vector<double> midpoint() const;
    bool contains(const std::vector<double>& x) const;
};

enum class ResidualMode { Absolute, Normalized };

struct ChainConfig {
    long iterations = 50000;
    double burn_in_fraction = 0.2;
    double step_fraction = 0.02;  // proposal sigma as a fraction of the prior width
    std::uint64_t seed = 0;
    int chain_count = 4;
    double sigma2 = 0.01;  // likelihood variance
    ResidualMode residual_mode = ResidualMode::Normalized;
    bool adapt = false;    // burn-in-only proposal scaling toward 20-40% acceptance
    std::optional<std::vector<double>> init;  // default: prior midpoint
};

// One Markov chain, flat row-major storage (iterations x dim).
struct Chain {
    std::size_t dim = 0;
    std::vector<double> samples;
    std::vector<double> log_post;
    double acceptance_rate = 0.0;
    std::size_t burn_in = 0;  // leading samples to discard in analysis

    std::size_t length() const { return dim ? samples.size() / dim : 0; }
    double at(std::size_t iter, std::size_t param) const { return samples[iter * dim + param]; }
    std::size_t post_burn_length() const { return length() - burn_in; }
};

// Random-walk Metropolis with a symmetric per-parameter Gaussian proposal.
// Proposals outside the prior bounds are rejected; deterministic given the seed.
// Throws when the target is non-finite at the initial point.
Chain mh_sample(const std::function<double(const std::vector<double>&)>& log_target,
                const PriorSpec& prior, const ChainConfig& config);

// Split-chain Gelman-Rubin R-hat per parameter. Needs >= 2 chains with equal
// post-burn-in lengths >= 4. Identical chains give exactly 1; zero within-chain
// variance with distinct means gives +inf.
std::vector<double> gelman_rubin(const std::vector<Chain>& chains);

// chain,iter,<param names...>,logpost (all iterations, burn-in included)
std::string chains_csv(const std::vector<Chain>& chains, const std::vector<std::string>& names);

}  // namespace terracal::calib
