#include "terracal/calibrate.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace terracal::calib {

PriorSpec default_pressure_prior() {
    return {{"Kc", "Kphi", "n"}, {-5e4, 1e3, 0.3}, {5e4, 1e6, 1.5}};
}
PriorSpec default_steady_prior() { return {{"c", "phi_deg"}, {0.0, 5.0}, {500.0, 45.0}}; }
PriorSpec default_ks_prior() { return {{"Ks"}, {1e-4}, {0.1}}; }

static double max_abs_force(const bev::GroundTruthSet& truth) {
    double m = 0.0;
    for (const auto& p : truth.sinkage) m = std::max(m, std::abs(p.force));
    return m;
}
static double max_abs_steady(const bev::GroundTruthSet& truth) {
    double m = 0.0;
    for (const auto& p : truth.steady) m = std::max(m, std::abs(p.torque));
    return m;
}
static double max_abs_transient(const bev::GroundTruthSet& truth) {
    double m = 0.0;
    for (const auto& p : truth.transient) m = std::max(m, std::abs(p.torque));
    return m;
}

static double quadratic_loglike(double sum_sq, std::size_t n, double sigma2) {
    return -0.5 / sigma2 * sum_sq / static_cast<double>(n);
}

double likelihood_force(double Kc, double Kphi, double n, const bev::GroundTruthSet& truth,
                        double sigma2, ResidualMode mode) {
    if (truth.sinkage.empty()) throw std::invalid_argument("likelihood: empty sinkage table");
    scm::ScmParams params;
    params.Kc = Kc;
    params.Kphi = Kphi;
    params.n = n;
    const double scale = mode == ResidualMode::Normalized ? max_abs_force(truth) : 1.0;
    double sum = 0.0;
    for (const auto& pt : truth.sinkage) {
        const double res = (bev::predicted_plate_force(pt.z, pt.plate_r, params) - pt.force) / scale;
        sum += res * res;
    }
    return quadratic_loglike(sum, truth.sinkage.size(), sigma2);
}

double likelihood_torque_steady(double c, double phi_deg, const bev::GroundTruthSet& truth,
                                double sigma2, ResidualMode mode) {
    if (truth.steady.empty()) throw std::invalid_argument("likelihood: empty steady table");
    scm::ScmParams params;
    params.c = c;
    params.phi_deg = phi_deg;
    const bev::AnnulusGeom geom{truth.annulus_r_inner, truth.annulus_r_outer};
    const double scale = mode == ResidualMode::Normalized ? max_abs_steady(truth) : 1.0;
    double sum = 0.0;
    for (const auto& pt : truth.steady) {
        const double res =
            (bev::predicted_annulus_torque_steady(pt.load_kg, geom, params, truth.gravity) - pt.torque) /
            scale;
        sum += res * res;
    }
    return quadratic_loglike(sum, truth.steady.size(), sigma2);
}

double likelihood_torque_transient(double Ks, double c, double phi_deg,
                                   const bev::GroundTruthSet& truth, double sigma2,
                                   ResidualMode mode) {
    if (truth.transient.empty()) throw std::invalid_argument("likelihood: empty transient table");
    scm::ScmParams params;
    params.c = c;
    params.phi_deg = phi_deg;
    params.Ks = Ks;
    const bev::AnnulusGeom geom{truth.annulus_r_inner, truth.annulus_r_outer};
    const double omega = truth.omega_deg_s * std::numbers::pi / 180.0;
    const double scale = mode == ResidualMode::Normalized ? max_abs_transient(truth) : 1.0;
    double sum = 0.0;
    for (const auto& pt : truth.transient) {
        const double res =
            (bev::predicted_annulus_torque(pt.load_kg, geom, omega, pt.t, params, truth.gravity) -
             pt.torque) /
            scale;
        sum += res * res;
    }
    return quadratic_loglike(sum, truth.transient.size(), sigma2);
}

double CalibrateConfig::resolve_sigma2(double truth_max_abs) const {
    if (sigma2) return *sigma2;
    if (residual_mode == ResidualMode::Absolute) return 0.01;
    return 0.01 / (truth_max_abs * truth_max_abs);
}

ChainConfig CalibrateConfig::chain_config(double resolved_sigma2, std::uint64_t chain_seed) const {
    ChainConfig cc;
    cc.iterations = iterations;
    cc.burn_in_fraction = burn_in_fraction;
    cc.step_fraction = step_fraction;
    cc.seed = chain_seed;
    cc.chain_count = chain_count;
    cc.sigma2 = resolved_sigma2;
    cc.residual_mode = residual_mode;
    cc.adapt = adapt;
    return cc;
}

static std::vector<Chain> run_chains(const std::function<double(const std::vector<double>&)>& target,
                                     const PriorSpec& prior, const CalibrateConfig& config,
                                     double sigma2, std::uint64_t seed_base) {
    std::vector<Chain> chains;
    for (int c = 0; c < config.chain_count; ++c)
        chains.push_back(mh_sample(target, prior, config.chain_config(sigma2, seed_base + c)));
    return chains;
}

CalibrationResult calibrate_pressure(const bev::GroundTruthSet& truth,
                                     const CalibrateConfig& config) {
    if (truth.plate_radii.size() < 2)
        throw std::invalid_argument("calibrate_pressure: need sinkage data for >= 2 plate radii");
    const double sigma2 = config.resolve_sigma2(max_abs_force(truth));
    const auto& radii = truth.plate_radii;
    auto target = [&truth, sigma2, &config, &radii](const std::vector<double>& x) {
        // Bekker modulus must stay positive for every in-use plate
        for (double r : radii)
            if (x[0] / r + x[1] <= 0.0) return -std::numeric_limits<double>::infinity();
        return likelihood_force(x[0], x[1], x[2], truth, sigma2, config.residual_mode);
    };
    CalibrationResult result;
    result.chains = run_chains(target, config.pressure_prior, config, sigma2, config.seed);
    result.summary = posterior_summary(result.chains, config.pressure_prior.names);
    return result;
}

CalibrationResult calibrate_shear(const bev::GroundTruthSet& truth, const CalibrateConfig& config) {
    if (truth.steady.empty() || truth.transient.empty())
        throw std::invalid_argument("calibrate_shear: need steady and transient tables");

    // stage A: (c, phi) on the steady table
    const double sigma2_a = config.resolve_sigma2(max_abs_steady(truth));
    auto target_a = [&truth, sigma2_a, &config](const std::vector<double>& x) {
        return likelihood_torque_steady(x[0], x[1], truth, sigma2_a, config.residual_mode);
    };
    CalibrationResult result;
    result.chains = run_chains(target_a, config.steady_prior, config, sigma2_a, config.seed);
    const PosteriorSummary stage_a = posterior_summary(result.chains, config.steady_prior.names);
    const double c_mean = stage_a.params[0].mean;
    const double phi_mean = stage_a.params[1].mean;

    // stage B: Ks on the transient table, (c, phi) frozen
    const double sigma2_b = config.resolve_sigma2(max_abs_transient(truth));
    auto target_b = [&truth, sigma2_b, &config, c_mean, phi_mean](const std::vector<double>& x) {
        return likelihood_torque_transient(x[0], c_mean, phi_mean, truth, sigma2_b,
                                           config.residual_mode);
    };
    result.stage_b_chains =
        run_chains(target_b, config.ks_prior, config, sigma2_b, config.seed + 1000);
    const PosteriorSummary stage_b = posterior_summary(result.stage_b_chains, config.ks_prior.names);

    result.summary.params = stage_a.params;
    result.summary.params.push_back(stage_b.params[0]);
    result.summary.r_hat_available = stage_a.r_hat_available;
    result.summary.r_hat_warning = stage_a.r_hat_warning || stage_b.r_hat_warning;
    result.summary.map_sample = {stage_a.map_sample[0], stage_a.map_sample[1], stage_b.map_sample[0]};
    result.summary.map_log_post = stage_b.map_log_post;
    return result;
}

scm::ScmParams posterior_mean_params(const PosteriorSummary& pressure,
                                     const PosteriorSummary& shear) {
    scm::ScmParams p;
    p.Kc = pressure.mean_of("Kc");
    p.Kphi = pressure.mean_of("Kphi");
    p.n = pressure.mean_of("n");
    p.c = shear.mean_of("c");
    p.phi_deg = shear.mean_of("phi_deg");
    p.Ks = shear.mean_of("Ks");
    p.validate();
    return p;
}

}  // namespace terracal::calib
