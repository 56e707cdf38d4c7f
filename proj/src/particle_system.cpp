#include "terracal/particle_system.hpp"

#include <random>
#include <sstream>
#include <stdexcept>

#include "terracal/io.hpp"

namespace terracal::dem {

double ParticleSystem::mean_kinetic_energy() const {
    if (pos.empty()) return 0.0;
    const double m = material.particle_mass();
    const double I = material.particle_inertia();
    double ke = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
        ke += 0.5 * m * vel[i].norm2() + 0.5 * I * ang_vel[i].norm2();
    return ke / static_cast<double>(size());
}

std::string ParticleSystem::to_csv() const {
    std::string out = "id,x,y,z,vx,vy,vz,wx,wy,wz\n";
    using io::format_double;
    for (std::size_t i = 0; i < size(); ++i) {
        out += std::to_string(i);
        const Vec3* v3[3] = {&pos[i], &vel[i], &ang_vel[i]};
        for (const Vec3* v : v3) {
            out += ',' + format_double(v->x) + ',' + format_double(v->y) + ',' + format_double(v->z);
        }
        out += '\n';
    }
    return out;
}

ParticleSystem ParticleSystem::from_csv(const std::string& csv, const MaterialParams& mat,
                                        const Vec3& gravity) {
    ParticleSystem sys;
    sys.material = mat;
    sys.gravity = gravity;
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("snapshot: empty file");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = io::split_csv(line);
        if (f.size() != 10) throw std::runtime_error("snapshot: expected 10 columns, got " + line);
        auto n = [&](int i) { return io::parse_double(f[i]); };
        sys.add({n(1), n(2), n(3)}, {n(4), n(5), n(6)}, {n(7), n(8), n(9)});
    }
    return sys;
}

ParticleSystem seed_lattice(std::size_t count, double bin_x, double bin_y,
                            const MaterialParams& mat, const Vec3& gravity,
                            std::uint64_t seed, double jitter_frac, double gap_frac) {
    mat.validate();
    ParticleSystem sys;
    sys.material = mat;
    sys.gravity = gravity;
    const double r = mat.radius;
    const double cell = 2.0 * r * (1.0 + gap_frac);
    const int nx = std::max(1, static_cast<int>((bin_x - 2.0 * r) / cell));
    const int ny = std::max(1, static_cast<int>((bin_y - 2.0 * r) / cell));
    const double x0 = 0.5 * (bin_x - nx * cell) + 0.5 * cell;
    const double y0 = 0.5 * (bin_y - ny * cell) + 0.5 * cell;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jit(-jitter_frac * r, jitter_frac * r);

    std::size_t placed = 0;
    for (int layer = 0; placed < count; ++layer) {
        const double z = r * 1.01 + layer * cell;
        for (int iy = 0; iy < ny && placed < count; ++iy) {
            for (int ix = 0; ix < nx && placed < count; ++ix) {
                const double jx = jit(rng), jy = jit(rng), jz = jit(rng);
                sys.add({x0 + ix * cell + jx, y0 + iy * cell + jy, z + jz});
                ++placed;
            }
        }
    }
    return sys;
}

}  // namespace terracal::dem
