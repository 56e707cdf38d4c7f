#pragma once

#include <string>
#include <vector>

#include "terracal/mcmc.hpp"

namespace terracal::calib {

struct KdeCurve {
    std::vector<double> x;
    std::vector<double> density;  // integrates to 1 (sum * dx) within 1e-3
};

struct ParamSummary {
    std::string name;
    double mean = 0.0;
    double sd = 0.0;
    double r_hat = 1.0;
    KdeCurve kde;
};

struct PosteriorSummary {
    std::vector<ParamSummary> params;
    std::vector<double> map_sample;  // pooled sample with the highest log posterior
    double map_log_post = 0.0;
    bool r_hat_available = false;  // false for a single chain
    bool r_hat_warning = false;    // any R-hat > 1.1

    double mean_of(const std::string& name) const;
    std::string to_text() const;   // mean/sd/R-hat per parameter, plain text
    std::string kde_csv() const;   // param,x,density
};

// Pooled post-burn-in statistics, Gaussian KDE (Silverman bandwidth, 512-point
// grid) and the MAP sample. R-hat attached when >= 2 chains are given.
PosteriorSummary posterior_summary(const std::vector<Chain>& chains,
                                   const std::vector<std::string>& names);

// exposed for direct use in tests
KdeCurve gaussian_kde(const std::vector<double>& samples, int grid_points = 512);

}  // namespace terracal::calib
