#pragma once

#include <optional>

#include "terracal/forward_models.hpp"
#include "terracal/ground_truth.hpp"
#include "terracal/mcmc.hpp"
#include "terracal/posterior.hpp"
#include "terracal/scm.hpp"

namespace terracal::calib {

// spec'd default priors; generous brackets around common soils
PriorSpec default_pressure_prior();   // Kc [-5e4, 5e4], Kphi [1e3, 1e6], n [0.3, 1.5]
PriorSpec default_steady_prior();     // c [0, 500] Pa, phi [5, 45] deg
PriorSpec default_ks_prior();         // Ks [1e-4, 0.1] m

// L = -(1/(2 sigma2)) (1/N) sum res^2; normalized mode divides residuals by the
// table's max |truth|.
double likelihood_force(double Kc, double Kphi, double n, const bev::GroundTruthSet& truth,
                        double sigma2, ResidualMode mode);
double likelihood_torque_steady(double c, double phi_deg, const bev::GroundTruthSet& truth,
                                double sigma2, ResidualMode mode);
double likelihood_torque_transient(double Ks, double c, double phi_deg,
                                   const bev::GroundTruthSet& truth, double sigma2,
                                   ResidualMode mode);

struct CalibrateConfig {
    long iterations = 50000;
    double burn_in_fraction = 0.2;
    int chain_count = 4;
    std::uint64_t seed = 42;
    double step_fraction = 0.02;
    bool adapt = true;
    ResidualMode residual_mode = ResidualMode::Normalized;
    // Likelihood variance. Unset = paper-equivalent default: 0.01 for absolute
    // residuals, 0.01/max|truth|^2 for normalized (the same posterior either way).
    std::optional<double> sigma2;
    PriorSpec pressure_prior = default_pressure_prior();
    PriorSpec steady_prior = default_steady_prior();
    PriorSpec ks_prior = default_ks_prior();

    double resolve_sigma2(double truth_max_abs) const;
    ChainConfig chain_config(double resolved_sigma2, std::uint64_t chain_seed) const;
};

struct CalibrationResult {
    PosteriorSummary summary;
    std::vector<Chain> chains;        // pressure: (Kc,Kphi,n); shear: stage-A (c,phi)
    std::vector<Chain> stage_b_chains;  // shear only: (Ks)
};

// Step 1: (Kc, Kphi, n) against the sinkage table. Needs >= 2 plate radii.
CalibrationResult calibrate_pressure(const bev::GroundTruthSet& truth, const CalibrateConfig& config);

// Step 2, two stages: (c, phi) against the steady table, then Ks against the
// transient table with (c, phi) frozen at their stage-A posterior means.
CalibrationResult calibrate_shear(const bev::GroundTruthSet& truth, const CalibrateConfig& config);

// posterior-mean parameter set assembled from both calibrations
scm::ScmParams posterior_mean_params(const PosteriorSummary& pressure,
                                     const PosteriorSummary& shear);

}  // namespace terracal::calib
