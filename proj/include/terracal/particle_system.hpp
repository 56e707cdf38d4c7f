#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "terracal/material.hpp"
#include "terracal/vec3.hpp"

namespace terracal::dem {

// Monodisperse sphere bed. Structure-of-sequences so hot loops stay contiguous.
struct ParticleSystem {
    std::vector<Vec3> pos;
    std::vector<Vec3> vel;
    std::vector<Vec3> ang_vel;
    MaterialParams material;
    Vec3 gravity{0.0, 0.0, -9.81};

    std::size_t size() const { return pos.size(); }

    void add(const Vec3& p, const Vec3& v = {}, const Vec3& w = {}) {
        pos.push_back(p);
        vel.push_back(v);
        ang_vel.push_back(w);
    }

    double mean_kinetic_energy() const;  // J per particle, translational + rotational

    // CSV snapshot `id,x,y,z,vx,vy,vz,wx,wy,wz`, shortest round-trip doubles
    std::string to_csv() const;
    static ParticleSystem from_csv(const std::string& csv, const MaterialParams& mat,
                                   const Vec3& gravity);
};

// Jittered cubic lattice above the bin floor; deterministic for a given seed.
// Lattice cells are (2r + gap) wide, filled floor-up inside [0,bin_x]x[0,bin_y].
ParticleSystem seed_lattice(std::size_t count, double bin_x, double bin_y,
                            const MaterialParams& mat, const Vec3& gravity,
                            std::uint64_t seed, double jitter_frac = 0.1,
                            double gap_frac = 0.05);

}  // namespace terracal::dem
