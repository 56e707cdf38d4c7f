#pragma once

#include "terracal/scm.hpp"

namespace terracal::bev {

// Closed-form SCM response of a flat circular plate: b = 2A/L = r for a disc,
// F = (Kc/r + Kphi) z^n pi r^2
double predicted_plate_force(double z, double plate_radius, const scm::ScmParams& params);

struct AnnulusGeom {
    double r_inner = 0.45;
    double r_outer = 0.6;
};

// Steady state: tau = tau_max everywhere, T = tau_max (2 pi / 3)(r_o^3 - r_i^3)
double predicted_annulus_torque_steady(double load_kg, const AnnulusGeom& geom,
                                       const scm::ScmParams& params, double gravity);

// Transient: T(t) = integral of tau(p, J_s = r omega t) 2 pi r^2 dr over [r_i, r_o],
// composite Simpson with `intervals` panels (>= 256 by default)
double predicted_annulus_torque(double load_kg, const AnnulusGeom& geom, double omega, double t,
                                const scm::ScmParams& params, double gravity, int intervals = 256);

// Simpson route for the steady integrand; matches the closed form to roundoff
double annulus_torque_quadrature_steady(double load_kg, const AnnulusGeom& geom,
                                        const scm::ScmParams& params, double gravity,
                                        int intervals = 256);

}  // namespace terracal::bev
