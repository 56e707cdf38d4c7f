#include "terracal/forward_models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace terracal::bev {

using std::numbers::pi;

double predicted_plate_force(double z, double plate_radius, const scm::ScmParams& params) {
    if (plate_radius <= 0) throw std::invalid_argument("plate force: radius must be > 0");
    const double p = scm::bekker_pressure(z, plate_radius, params);
    return p * pi * plate_radius * plate_radius;
}

static double annulus_pressure(double load_kg, const AnnulusGeom& g, double gravity) {
    if (load_kg <= 0) throw std::invalid_argument("annulus torque: load must be > 0");
    if (!(g.r_inner < g.r_outer)) throw std::invalid_argument("annulus torque: need r_inner < r_outer");
    return load_kg * gravity / (pi * (g.r_outer * g.r_outer - g.r_inner * g.r_inner));
}

double predicted_annulus_torque_steady(double load_kg, const AnnulusGeom& g,
                                       const scm::ScmParams& params, double gravity) {
    const double p = annulus_pressure(load_kg, g, gravity);
    const double tau_max = params.c + p * std::tan(params.phi_deg * pi / 180.0);
    return tau_max * (2.0 * pi / 3.0) * (std::pow(g.r_outer, 3) - std::pow(g.r_inner, 3));
}

// composite Simpson over [r_i, r_o] of f(r) = tau(r) 2 pi r^2
static double simpson_torque(const AnnulusGeom& g, int intervals, const auto& tau_of_r) {
    if (intervals < 2) throw std::invalid_argument("annulus torque: need >= 2 quadrature intervals");
    if (intervals % 2) ++intervals;
    const double h = (g.r_outer - g.r_inner) / intervals;
    double sum = 0.0;
    for (int k = 0; k <= intervals; ++k) {
        const double r = g.r_inner + k * h;
        const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        sum += w * tau_of_r(r) * 2.0 * pi * r * r;
    }
    return sum * h / 3.0;
}

double predicted_annulus_torque(double load_kg, const AnnulusGeom& g, double omega, double t,
                                const scm::ScmParams& params, double gravity, int intervals) {
    const double p = annulus_pressure(load_kg, g, gravity);
    return simpson_torque(g, intervals, [&](double r) {
        return scm::janosi_shear(p, r * omega * t, params);
    });
}

double annulus_torque_quadrature_steady(double load_kg, const AnnulusGeom& g,
                                        const scm::ScmParams& params, double gravity,
                                        int intervals) {
    const double p = annulus_pressure(load_kg, g, gravity);
    const double tau_max = params.c + p * std::tan(params.phi_deg * pi / 180.0);
    return simpson_torque(g, intervals, [&](double) { return tau_max; });
}

}  // namespace terracal::bev
