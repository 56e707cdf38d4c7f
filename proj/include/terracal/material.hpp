#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace terracal::dem {

// Hertz-Mindlin material constants shared by every grain and grain-implement pair.
struct MaterialParams {
    double k_n = 10000.0;    // normal stiffness, N/m
    double k_t = 10000.0;    // tangential stiffness, N/m
    double gamma_n = 10000.0;  // normal damping, 1/s
    double gamma_t = 2000.0;   // tangential damping, 1/s
    double mu_s = 0.9;       // static friction coefficient
    double mu_r = 0.9;       // rolling resistance coefficient
    double f_c = 0.0;        // cohesion force magnitude, N (attractive)
    double radius = 0.005;   // sphere radius, m
    double density = 2650.0; // grain density, kg/m^3

    double particle_mass() const {
        return (4.0 / 3.0) * std::numbers::pi * radius * radius * radius * density;
    }
    // uniform solid sphere
    double particle_inertia() const { return 0.4 * particle_mass() * radius * radius; }

    void validate() const {
        if (k_n < 0 || k_t < 0 || gamma_n < 0 || gamma_t < 0)
            throw std::invalid_argument("material: stiffness/damping must be >= 0");
        if (mu_s < 0 || mu_r < 0) throw std::invalid_argument("material: friction coefficients must be >= 0");
        if (radius <= 0) throw std::invalid_argument("material: radius must be > 0");
        if (density <= 0) throw std::invalid_argument("material: density must be > 0");
        if (f_c < 0) throw std::invalid_argument("material: cohesion must be >= 0");
    }
};

}  // namespace terracal::dem
