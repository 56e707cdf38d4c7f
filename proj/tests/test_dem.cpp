#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "terracal/dem_solver.hpp"
#include "terracal/neighbor_grid.hpp"

using namespace terracal;
using namespace terracal::dem;

namespace {

MaterialParams paper_material() {
    MaterialParams m;  // defaults are the reference soil
    m.f_c = 0.0;
    return m;
}

ParticleSystem two_spheres(double distance, const MaterialParams& mat) {
    ParticleSystem sys;
    sys.material = mat;
    sys.gravity = {0, 0, 0};
    sys.add({0, 0, 0});
    sys.add({distance, 0, 0});
    return sys;
}

ParticleSystem random_cloud(std::size_t n, double box, std::uint64_t seed,
                            const MaterialParams& mat, double vel_scale = 0.0) {
    ParticleSystem sys;
    sys.material = mat;
    sys.gravity = {0, 0, 0};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, box);
    std::uniform_real_distribution<double> v(-vel_scale, vel_scale);
    for (std::size_t k = 0; k < n; ++k)
        sys.add({u(rng), u(rng), u(rng)}, {v(rng), v(rng), v(rng)}, {v(rng), v(rng), v(rng)});
    return sys;
}

Vec3 total_momentum(const ParticleSystem& sys) {
    Vec3 p;
    const double m = sys.material.particle_mass();
    for (const Vec3& v : sys.vel) p += v * m;
    return p;
}

}  // namespace

TEST_CASE("overlap arithmetic and edge cases") {
    CHECK(overlap({0, 0, 0}, {0.0099, 0, 0}, 0.005, 0.005) == doctest::Approx(1.0e-4));
    CHECK(overlap({0, 0, 0}, {0.01, 0, 0}, 0.005, 0.005) == doctest::Approx(0.0));
    CHECK(overlap({0, 0, 0}, {0.0075, 0, 0}, 0.005, 0.003) == doctest::Approx(5.0e-4));
    CHECK(overlap({0, 0, 0}, {0.012, 0, 0}, 0.005, 0.005) < 0.0);
    CHECK_THROWS_AS(overlap({1, 2, 3}, {1, 2, 3}, 0.005, 0.005), std::invalid_argument);
}

TEST_CASE("effective radius and mass") {
    double r_eff, m_eff;
    effective_pair(0.005, 0.005, 2.0, 2.0, r_eff, m_eff);
    CHECK(r_eff == doctest::Approx(0.0025));
    CHECK(m_eff == doctest::Approx(1.0));
    const double inf = std::numeric_limits<double>::infinity();
    effective_pair(0.005, inf, 1.5, inf, r_eff, m_eff);
    CHECK(r_eff == doctest::Approx(0.005));
    CHECK(m_eff == doctest::Approx(1.5));
}

TEST_CASE("relative velocity decomposition") {
    Vec3 v_n, v_t;
    // both at rest
    relative_velocities({0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0.0099, 0, 0},
                        {0.00495, 0, 0}, {-1, 0, 0}, v_n, v_t);
    CHECK(v_n.norm() == doctest::Approx(0.0));
    CHECK(v_t.norm() == doctest::Approx(0.0));

    // head-on approach at 1 m/s
    relative_velocities({1, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0.0099, 0, 0},
                        {0.00495, 0, 0}, {-1, 0, 0}, v_n, v_t);
    CHECK(v_n.norm() == doctest::Approx(1.0));
    CHECK(v_t.norm() == doctest::Approx(0.0));
    CHECK(v_n.dot(v_t) == doctest::Approx(0.0));

    // equal spheres spinning with equal omega about the contact normal
    const Vec3 w{7.0, 0, 0};
    relative_velocities({0, 0, 0}, w, {0, 0, 0}, {0, 0, 0}, w, {0.0099, 0, 0}, {0.00495, 0, 0},
                        {-1, 0, 0}, v_n, v_t);
    CHECK(v_t.norm() == doctest::Approx(0.0).epsilon(1e-12));

    // orthogonality holds for arbitrary kinematics
    const Vec3 n = Vec3{-0.937, -0.312, -0.104}.normalized();
    relative_velocities({0.3, -1.2, 0.7}, {5, -3, 2}, {0, 0, 0}, {-0.1, 0.4, 0.2}, {1, 8, -2},
                        {0.009, 0.003, 0.001}, {0.0045, 0.0015, 0.0005}, n, v_n, v_t);
    CHECK(std::abs(v_n.dot(v_t)) <= 1e-10 * std::max(1.0, v_n.norm() * v_t.norm()));
}

TEST_CASE("normal force magnitude and limits") {
    MaterialParams m = paper_material();
    const Vec3 n{1, 0, 0};
    const Vec3 f = normal_force(1e-4, 0.0025, 1.0, {0, 0, 0}, n, m);
    CHECK(f.norm() == doctest::Approx(std::sqrt(0.02) * 1e4 * 1e-4).epsilon(1e-9));
    CHECK(f.dot(n) > 0.0);  // repulsive along the outward normal

    // vanishing prefactor at delta -> 0+
    const Vec3 tiny = normal_force(1e-30, 0.0025, 1.0, {0.5, 0, 0}, n, m);
    CHECK(tiny.norm() < 1e-10);

    // cohesion magnitude from the reference soil: half of one particle weight
    m.f_c = 0.5 * m.particle_mass() * 9.81;
    CHECK(m.f_c == doctest::Approx(6.81e-3).epsilon(1e-2));
    const Vec3 fc = normal_force(1e-12, 0.0025, 1.0, {0, 0, 0}, n, m);
    CHECK(fc.dot(n) < 0.0);  // attractive

    CHECK_THROWS_AS(normal_force(0.0, 0.0025, 1.0, {0, 0, 0}, n, m), std::invalid_argument);
}

TEST_CASE("tangential displacement update with Coulomb cap") {
    MaterialParams m = paper_material();
    const Vec3 n{0, 0, 1};

    CHECK(update_tangential_displacement({0, 0, 0}, {0, 0, 0}, n, 1e-4, 1e-5, m).norm() ==
          doctest::Approx(0.0));

    // |u_proj| = 2e-4 above the cap mu_s k_n delta / k_t = 9e-5
    const Vec3 u = update_tangential_displacement({2e-4, 0, 0}, {0, 0, 0}, n, 1e-4, 1e-5, m);
    CHECK(u.norm() == doctest::Approx(9e-5).epsilon(1e-12));

    // below the cap: unchanged
    const Vec3 u2 = update_tangential_displacement({5e-5, 0, 0}, {0, 0, 0}, n, 1e-4, 1e-5, m);
    CHECK(u2.x == doctest::Approx(5e-5).epsilon(1e-14));

    // re-projection keeps the history tangent
    const Vec3 u3 =
        update_tangential_displacement({1e-5, 2e-5, 3e-5}, {0.1, 0.2, -0.4}, n, 1e-4, 1e-5, m);
    CHECK(std::abs(u3.dot(n)) <= 1e-10 * std::max(u3.norm(), 1.0));
}

TEST_CASE("tangential force magnitude and sign") {
    MaterialParams m = paper_material();
    CHECK(tangential_force(1e-4, 0.0025, 1.0, {0, 0, 0}, {0, 0, 0}, m).norm() ==
          doctest::Approx(0.0));

    const Vec3 u{9e-5, 0, 0};
    const Vec3 f = tangential_force(1e-4, 0.0025, 1.0, {0, 0, 0}, u, m);
    CHECK(f.norm() == doctest::Approx(0.1414 * 0.9).epsilon(1e-3));
    CHECK(f.dot(u) <= 0.0);  // spring opposes the stored displacement
}

TEST_CASE("rolling resistance torque") {
    MaterialParams m = paper_material();
    const Vec3 fn{0.1414, 0, 0};
    CHECK(rolling_torque({3, 1, 2}, {3, 1, 2}, 0.0025, fn, m).norm() == doctest::Approx(0.0));

    const Vec3 t = rolling_torque({1, 0, 0}, {0, 0, 0}, 0.0025, fn, m);
    CHECK(t.norm() == doctest::Approx(3.18e-4).epsilon(1e-2));
    CHECK(t.x > 0.0);  // along the relative spin

    const Vec3 t2 = rolling_torque({1, 0, 0}, {0, 0, 0}, 0.0025, fn * 2.0, m);
    CHECK(t2.norm() == doctest::Approx(2.0 * t.norm()).epsilon(1e-12));
}

TEST_CASE("free fall over one step") {
    MaterialParams m = paper_material();
    m.k_n = 100.0;  // softer contact so dt = 1e-4 is inside the stability bound
    m.k_t = 100.0;
    ParticleSystem sys;
    sys.material = m;
    sys.gravity = {0, 0, -9.81};
    sys.add({0, 0, 1.0});
    std::vector<RigidImplement> none;
    DemSolver solver;
    solver.step(sys, none, 1e-4);
    CHECK(sys.vel[0].z == doctest::Approx(-9.81e-4).epsilon(1e-12));
    CHECK(sys.pos[0].z == doctest::Approx(1.0 - 9.81e-4 * 1e-4).epsilon(1e-12));
}

TEST_CASE("step rejects bad dt and detects non-finite state") {
    MaterialParams m = paper_material();
    ParticleSystem sys = two_spheres(0.0099, m);
    std::vector<RigidImplement> none;
    DemSolver solver;
    CHECK_THROWS_AS(solver.step(sys, none, 10.0 * stable_dt(m)), std::invalid_argument);
    CHECK_THROWS_AS(solver.step(sys, none, -1.0), std::invalid_argument);

    // move the pair out of contact so the NaN stays on particle 1 only
    sys.pos[1] = {0.05, 0, 0};
    sys.vel[1] = {std::numeric_limits<double>::quiet_NaN(), 0, 0};
    try {
        solver.step(sys, none, 0.5 * stable_dt(m));
        FAIL("expected non-finite state error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("particle 1") != std::string::npos);
    }
}

TEST_CASE("binary collision conserves momentum every step") {
    MaterialParams m = paper_material();
    m.mu_s = 0.0;
    m.mu_r = 0.0;
    ParticleSystem sys = two_spheres(0.0101, m);
    sys.vel[0] = {0.05, 0, 0};
    sys.vel[1] = {-0.05, 0, 0};
    const Vec3 p0 = total_momentum(sys);
    std::vector<RigidImplement> none;
    DemSolver solver;
    const double dt = 0.5 * stable_dt(m);
    for (int s = 0; s < 2000; ++s) {
        solver.step(sys, none, dt);
        const Vec3 drift = total_momentum(sys) - p0;
        CHECK(drift.norm() <= 1e-10 * std::max(p0.norm(), 1e-3));
    }
    // they must actually have collided and separated
    CHECK(sys.vel[0].x < 0.0);
    CHECK(sys.vel[1].x > 0.0);
}

TEST_CASE("momentum drift over 1000 steps of a busy cloud") {
    MaterialParams m = paper_material();
    ParticleSystem sys = random_cloud(300, 0.05, 99, m, 0.02);
    const Vec3 p0 = total_momentum(sys);
    std::vector<RigidImplement> none;
    DemSolver solver;
    const double dt = 0.5 * stable_dt(m);
    for (int s = 0; s < 1000; ++s) solver.step(sys, none, dt);
    const double drift = (total_momentum(sys) - p0).norm();
    if (p0.norm() > 0)
        CHECK(drift <= 1e-9 * p0.norm() + 1e-12);
    else
        CHECK(drift <= 1e-12);
}

TEST_CASE("momentum stays zero starting from rest") {
    MaterialParams m = paper_material();
    ParticleSystem sys = random_cloud(200, 0.04, 7, m, 0.0);
    std::vector<RigidImplement> none;
    DemSolver solver;
    const double dt = 0.5 * stable_dt(m);
    for (int s = 0; s < 1000; ++s) solver.step(sys, none, dt);
    CHECK(total_momentum(sys).norm() <= 1e-12);
}

TEST_CASE("energy is non-increasing in a damped binary collision") {
    MaterialParams m = paper_material();
    m.mu_s = 0.0;
    m.mu_r = 0.0;
    ParticleSystem sys = two_spheres(0.0102, m);
    sys.vel[0] = {0.1, 0, 0};
    sys.vel[1] = {-0.1, 0, 0};
    std::vector<RigidImplement> none;
    DemSolver solver;
    const double dt = 0.1 * stable_dt(m);
    const double mass = m.particle_mass();
    auto energy = [&] {
        const double ke = 0.5 * mass * (sys.vel[0].norm2() + sys.vel[1].norm2());
        const double delta = std::max(0.0, 2.0 * m.radius - (sys.pos[1] - sys.pos[0]).norm());
        const double elastic = 0.4 * m.k_n / std::sqrt(2.0 * 0.0025) * std::pow(delta, 2.5);
        return ke + elastic;
    };
    double prev = energy();
    const double slack = 1e-6 * prev;  // covers contact-onset discretization blips
    for (int s = 0; s < 10000; ++s) {
        solver.step(sys, none, dt);
        const double now = energy();
        CHECK(now <= prev + slack);
        prev = now;
    }
}

TEST_CASE("integrator convergence: post-collision speeds at dt and dt/10 within 1%") {
    MaterialParams m = paper_material();
    m.mu_s = 0.0;
    m.mu_r = 0.0;
    auto run = [&](double dt) {
        ParticleSystem sys = two_spheres(0.0102, m);
        sys.vel[0] = {0.1, 0, 0};
        sys.vel[1] = {-0.1, 0, 0};
        std::vector<RigidImplement> none;
        DemSolver solver;
        const int steps = static_cast<int>(0.05 / dt);
        for (int s = 0; s < steps; ++s) solver.step(sys, none, dt);
        // separated again by symmetry; report the exit speed
        REQUIRE((sys.pos[1] - sys.pos[0]).norm() > 2.0 * m.radius);
        return std::abs(sys.vel[0].x);
    };
    const double coarse = run(0.5 * stable_dt(m));
    const double fine = run(0.05 * stable_dt(m));
    CHECK(coarse == doctest::Approx(fine).epsilon(0.01));
}

TEST_CASE("Coulomb cap and tangency hold for every ledger entry during a pile collapse") {
    MaterialParams m = paper_material();
    m.f_c = 0.5 * m.particle_mass() * 9.81;
    ParticleSystem sys = seed_lattice(400, 0.08, 0.08, m, {0, 0, -9.81}, 17);
    std::vector<RigidImplement> implements;
    implements.push_back(RigidImplement::half_space({0, 0, 0}, {0, 0, 1}, "floor"));
    DemSolver solver;
    const double dt = 0.5 * stable_dt(m);
    for (int s = 0; s < 3000; ++s) {
        solver.step(sys, implements, dt);
        if (s % 50 != 0) continue;
        for (const ContactCandidate& c : solver.last_contacts()) {
            const Vec3* u = solver.ledger().find(c.key());
            REQUIRE(u != nullptr);
            CHECK(m.k_t * u->norm() <= m.mu_s * m.k_n * c.overlap + 1e-9);
            CHECK(std::abs(u->dot(c.normal)) <= 1e-10 * std::max(u->norm(), 1.0));
        }
    }
}

TEST_CASE("grid broad phase matches the all-pairs oracle") {
    MaterialParams m = paper_material();
    std::vector<RigidImplement> implements;
    implements.push_back(RigidImplement::half_space({0, 0, 0}, {0, 0, 1}, "floor"));
    implements.push_back(RigidImplement::plate(0.02, {0.05, 0.05, 0.012}, "plate"));

    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        ParticleSystem sys = random_cloud(1500, 0.1, seed, m, 0.1);
        NeighborGrid grid;
        std::vector<ContactCandidate> a, b;
        grid.find_contacts(sys, implements, a);
        brute_force_contacts(sys, implements, b);
        REQUIRE(a.size() == b.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
            CHECK(a[k].key() == b[k].key());
            CHECK(a[k].overlap == b[k].overlap);
            CHECK(a[k].normal.x == b[k].normal.x);
            CHECK(a[k].point.z == b[k].point.z);
        }

        // after motion the Verlet list must still match exactly
        DemSolver solver;
        const double dt = 0.5 * stable_dt(m);
        for (int s = 0; s < 400; ++s) solver.step(sys, implements, dt);
        grid.find_contacts(sys, implements, a);
        brute_force_contacts(sys, implements, b);
        REQUIRE(a.size() == b.size());
        for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].key() == b[k].key());
    }
}

TEST_CASE("two spheres emit the expected candidates") {
    MaterialParams m = paper_material();
    NeighborGrid grid;
    std::vector<ContactCandidate> out;
    std::vector<RigidImplement> none;

    ParticleSystem far = two_spheres(0.012, m);
    grid.find_contacts(far, none, out);
    CHECK(out.empty());

    NeighborGrid grid2;
    ParticleSystem close_pair = two_spheres(0.0099, m);
    grid2.find_contacts(close_pair, none, out);
    REQUIRE(out.size() == 1);
    CHECK(out[0].overlap == doctest::Approx(1e-4));
    CHECK(out[0].i == 0);
    CHECK(out[0].j == 1);
}

TEST_CASE("settled bed stays quiescent") {
    MaterialParams m = paper_material();
    m.f_c = 0.5 * m.particle_mass() * 9.81;
    ParticleSystem sys = seed_lattice(1200, 0.12, 0.12, m, {0, 0, -9.81}, 3);
    std::vector<RigidImplement> implements;
    implements.push_back(RigidImplement::half_space({0, 0, 0}, {0, 0, 1}, "floor"));
    implements.push_back(RigidImplement::half_space({0, 0, 0}, {1, 0, 0}, "wx0"));
    implements.push_back(RigidImplement::half_space({0.12, 0, 0}, {-1, 0, 0}, "wx1"));
    implements.push_back(RigidImplement::half_space({0, 0, 0}, {0, 1, 0}, "wy0"));
    implements.push_back(RigidImplement::half_space({0, 0.12, 0}, {0, -1, 0}, "wy1"));
    DemSolver solver;
    const double dt = 0.5 * stable_dt(m);
    // let the lattice drop, then run until the bed is well below the threshold
    int steps = 0;
    do {
        solver.step(sys, implements, dt);
        REQUIRE(++steps < 400000);
    } while (steps < 2000 || sys.mean_kinetic_energy() >= 2e-9);
    for (int s = 0; s < 10000; ++s) {
        solver.step(sys, implements, dt);
        if (s % 500 == 0) CHECK(sys.mean_kinetic_energy() < 1e-8);
    }
    CHECK(sys.mean_kinetic_energy() < 1e-8);
}

TEST_CASE("implement wrench is the exact reaction") {
    MaterialParams m = paper_material();
    ParticleSystem sys;
    sys.material = m;
    sys.gravity = {0, 0, -9.81};
    sys.add({0.05, 0.05, m.radius * 0.9});  // pressed into the floor
    std::vector<RigidImplement> implements;
    implements.push_back(RigidImplement::half_space({0, 0, 0}, {0, 0, 1}, "floor"));
    DemSolver solver;
    const double dt = 0.5 * stable_dt(m);
    ParticleSystem before = sys;
    const auto wrenches = solver.step(sys, implements, dt);
    // soil pushes the particle up, so the floor feels the negation
    const double mass = m.particle_mass();
    const double applied_z = (sys.vel[0].z - before.vel[0].z) / dt * mass + 9.81 * mass;
    CHECK(wrenches[0].force.z == doctest::Approx(-applied_z).epsilon(1e-9));
}
