#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "terracal/scm.hpp"

using namespace terracal;
using namespace terracal::scm;

namespace {

// analytic chord geometry for a cylinder of radius R pressed depth z into flat
// terrain: half chord a, patch = 2a x width rectangle
struct ChordPatch {
    double a, area, perimeter, b;
};
ChordPatch chord_patch(double R, double width, double z) {
    const double a = std::sqrt(z * (2.0 * R - z));
    const double area = width * 2.0 * a;
    const double perimeter = 2.0 * (width + 2.0 * a);
    return {a, area, perimeter, 2.0 * area / perimeter};
}

HeightField flat_field(double size_x, double size_y, double res) {
    return HeightField(static_cast<int>(size_x / res) + 1, static_cast<int>(size_y / res) + 1, res);
}

dem::RigidImplement pressed_cylinder(double R, double width, double z, double cx, double cy) {
    return dem::RigidImplement::cylinder_wheel(R, width, {cx, cy, R - z}, "wheel");
}

}  // namespace

TEST_CASE("bekker pressure formula and contract") {
    ScmParams p = ScmParams::table_defaults();
    CHECK(bekker_pressure(0.0, 0.2, p) == doctest::Approx(0.0));

    ScmParams lin;
    lin.Kc = 0.0;
    lin.Kphi = 1000.0;
    lin.n = 1.0;
    CHECK(bekker_pressure(0.2, 0.5, lin) == doctest::Approx(200.0));

    CHECK(bekker_pressure(0.1, 0.2, p) == doctest::Approx(2.760e4).epsilon(2e-3));

    ScmParams bad = p;
    bad.Kc = -1e6;
    CHECK_THROWS_AS(bekker_pressure(0.1, 0.2, bad), std::invalid_argument);
    CHECK_THROWS_AS(bekker_pressure(-0.1, 0.2, p), std::invalid_argument);
    CHECK_THROWS_AS(bekker_pressure(0.1, 0.0, p), std::invalid_argument);
}

TEST_CASE("bekker pressure is strictly increasing in sinkage") {
    ScmParams p = ScmParams::table_defaults();
    double prev = 0.0;
    for (double z = 0.01; z <= 0.3; z += 0.01) {
        const double now = bekker_pressure(z, 0.15, p);
        CHECK(now > prev);
        prev = now;
    }
}

TEST_CASE("janosi shear saturation and bounds") {
    ScmParams p = ScmParams::table_defaults();
    CHECK(janosi_shear(1000.0, 0.0, p) == doctest::Approx(0.0));

    const double p100 = 1982.8;
    const double tau_max = p.c + p100 * std::tan(p.phi_deg * std::numbers::pi / 180.0);
    CHECK(tau_max == doctest::Approx(793.2).epsilon(1e-3));
    CHECK(janosi_shear(p100, 8.727e-3, p) == doctest::Approx(599.0).epsilon(2e-3));
    CHECK(janosi_shear(p100, 100.0 * p.Ks, p) == doctest::Approx(tau_max).epsilon(1e-10));

    double prev = -1.0;
    for (double js = 0.0; js < 0.05; js += 1e-3) {
        const double tau = janosi_shear(p100, js, p);
        CHECK(tau < tau_max);
        CHECK(tau >= prev);
        prev = tau;
    }
}

TEST_CASE("params file round trip and validation") {
    const ScmParams p = ScmParams::table_defaults();
    const ScmParams q = ScmParams::parse(p.serialize());
    CHECK(q.Kc == p.Kc);
    CHECK(q.Kphi == p.Kphi);
    CHECK(q.n == p.n);
    CHECK(q.c == p.c);
    CHECK(q.phi_deg == p.phi_deg);
    CHECK(q.Ks == p.Ks);
    CHECK_THROWS(ScmParams::parse("Kc = 1\n"));  // missing keys
    ScmParams bad = p;
    bad.n = -1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.phi_deg = 95;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("ray-cast patch matches chord geometry for the reference cylinder") {
    const double R = 0.47, W = 0.3, Z = 0.05;
    const ChordPatch exact = chord_patch(R, W, Z);
    CHECK(exact.a == doctest::Approx(0.2110).epsilon(1e-3));
    CHECK(exact.area == doctest::Approx(0.1266).epsilon(1e-3));
    CHECK(exact.perimeter == doctest::Approx(1.4438).epsilon(1e-3));
    CHECK(exact.b == doctest::Approx(0.1753).epsilon(1e-3));

    double prev_err = 1.0;
    for (double res : {0.01, 0.005, 0.0025}) {
        HeightField field = flat_field(1.2, 0.6, res);
        const auto wheel = pressed_cylinder(R, W, Z, 0.6, 0.3);
        const ContactPatch patch = raycast_patch(field, wheel);
        REQUIRE_FALSE(patch.empty());
        const double err_a = std::abs(patch.area - exact.area) / exact.area;
        const double err_l = std::abs(patch.perimeter - exact.perimeter) / exact.perimeter;
        const double err_b = std::abs(patch.b - exact.b) / exact.b;
        if (res == 0.005) {
            CHECK(err_a < 0.02);
            CHECK(err_l < 0.02);
            CHECK(err_b < 0.02);
        }
        const double err = std::max({err_a, err_l, err_b});
        CHECK(err < prev_err + 1e-12);  // refinement does not make it worse
        prev_err = err;

        // b definition holds exactly for every non-empty patch
        CHECK(patch.b * patch.perimeter == doctest::Approx(2.0 * patch.area).epsilon(1e-12));
        // max sinkage at the chord center equals the pressed depth
        double zmax = 0.0;
        for (const PatchNode& n : patch.nodes) zmax = std::max(zmax, n.z);
        CHECK(zmax == doctest::Approx(Z).epsilon(0.02));
    }
}

TEST_CASE("hovering wheel gives an empty patch and zero wrench") {
    HeightField field = flat_field(1.0, 0.6, 0.01);
    const auto wheel = dem::RigidImplement::cylinder_wheel(0.47, 0.3, {0.5, 0.3, 0.6}, "wheel");
    const ContactPatch patch = raycast_patch(field, wheel);
    CHECK(patch.empty());

    HeightField before = field;
    const ScmWrench w = scm_step(field, wheel, ScmParams::table_defaults(), 1e-3);
    CHECK(w.force.norm() == 0.0);
    CHECK(w.torque.norm() == 0.0);
    CHECK(field.to_csv() == before.to_csv());
}

TEST_CASE("flush disc patch approaches the Manhattan-perimeter limit") {
    // boundary-edge counting measures the Manhattan length of the rim, so a disc
    // converges to L = 8 r and b = (pi/4) r, not the Euclidean 2 pi r
    const double R = 0.2;
    dem::TriMesh disc;
    const int nseg = 256;
    disc.vertices.push_back({0, 0, -1e-4});
    for (int k = 0; k < nseg; ++k) {
        const double a = 2.0 * std::numbers::pi * k / nseg;
        disc.vertices.push_back({R * std::cos(a), R * std::sin(a), -1e-4});
    }
    for (int k = 0; k < nseg; ++k)
        disc.faces.push_back({0u, static_cast<std::uint32_t>(1 + k),
                              static_cast<std::uint32_t>(1 + (k + 1) % nseg)});

    for (double res : {0.02, 0.01, 0.005}) {
        HeightField field = flat_field(0.6, 0.6, res);
        auto plate = dem::RigidImplement::mesh_wheel(disc, {0.3, 0.3, 0.0}, "disc");
        const ContactPatch patch = raycast_patch(field, plate);
        REQUIRE_FALSE(patch.empty());
        if (res == 0.005) {
            CHECK(patch.area == doctest::Approx(std::numbers::pi * R * R).epsilon(0.03));
            CHECK(patch.perimeter == doctest::Approx(8.0 * R).epsilon(0.03));
            CHECK(patch.b == doctest::Approx(std::numbers::pi * R / 4.0).epsilon(0.03));
        }
    }
}

TEST_CASE("static pressed cylinder wrench matches the chord-patch integral") {
    const double R = 0.47, W = 0.3, Z = 0.05, res = 0.005;
    const ScmParams params = ScmParams::table_defaults();
    HeightField field = flat_field(1.2, 0.6, res);
    const auto wheel = pressed_cylinder(R, W, Z, 0.6, 0.3);
    const ScmWrench w = scm_step(field, wheel, params, 1e-3);

    // quadrature over the analytic patch: F = W int (Kc/b + Kphi) z(x)^n dx with
    // z(x) = Z - (R - sqrt(R^2 - x^2)), b from the chord rectangle
    const ChordPatch exact = chord_patch(R, W, Z);
    const int nq = 4096;
    double integral = 0.0;
    for (int k = 0; k < nq; ++k) {
        const double x = -exact.a + (k + 0.5) * (2.0 * exact.a / nq);
        const double zx = Z - (R - std::sqrt(R * R - x * x));
        integral += bekker_pressure(zx, exact.b, params) * (2.0 * exact.a / nq);
    }
    const double f_exact = W * integral;
    CHECK(w.force.z == doctest::Approx(f_exact).epsilon(0.03));
    // no slip for a static wheel: the patch shear cannot push it sideways
    CHECK(std::abs(w.force.x) < 1e-9 * f_exact);
}

TEST_CASE("pure spin develops traction that grows toward the saturation limit") {
    const double R = 0.47, W = 0.3, res = 0.01;
    const ScmParams params = ScmParams::table_defaults();
    HeightField field = flat_field(1.2, 0.6, res);
    auto wheel = pressed_cylinder(R, W, 0.05, 0.6, 0.3);
    wheel.ang_vel = {0, 5.0, 0};  // spinning in place, no travel

    std::vector<double> history;
    for (int s = 0; s < 400; ++s) {
        const ScmWrench w = scm_step(field, wheel, params, 1e-3);
        history.push_back(w.force.x);
    }
    // monotone growth in time toward a plateau
    for (std::size_t k = 1; k < history.size(); ++k)
        CHECK(history[k] >= history[k - 1] - 1e-9);
    CHECK(history.back() > 0.0);  // patch surface moves backward: soil thrust is forward
    CHECK(history.back() == doctest::Approx(history[history.size() - 2]).epsilon(1e-6));
}

TEST_CASE("plastic terrain never rebounds") {
    const ScmParams params = ScmParams::table_defaults();
    HeightField field = flat_field(1.2, 0.6, 0.01);
    auto wheel = pressed_cylinder(0.47, 0.3, 0.03, 0.6, 0.3);
    scm_step(field, wheel, params, 1e-3);
    std::vector<double> elev_after_loading;
    for (int iy = 0; iy < field.ny(); ++iy)
        for (int ix = 0; ix < field.nx(); ++ix) elev_after_loading.push_back(field.elevation(ix, iy));

    wheel.pos.z += 0.05;  // lift off
    scm_step(field, wheel, params, 1e-3);
    std::size_t k = 0;
    for (int iy = 0; iy < field.ny(); ++iy)
        for (int ix = 0; ix < field.nx(); ++ix)
            CHECK(field.elevation(ix, iy) == elev_after_loading[k++]);

    wheel.pos.z -= 0.06;  // press deeper: elevations may only go down
    scm_step(field, wheel, params, 1e-3);
    k = 0;
    for (int iy = 0; iy < field.ny(); ++iy)
        for (int ix = 0; ix < field.nx(); ++ix)
            CHECK(field.elevation(ix, iy) <= elev_after_loading[k++]);
}

TEST_CASE("shear accumulator resets when a node leaves contact") {
    const ScmParams params = ScmParams::table_defaults();
    HeightField field = flat_field(1.2, 0.6, 0.01);
    auto wheel = pressed_cylinder(0.47, 0.3, 0.03, 0.6, 0.3);
    wheel.ang_vel = {0, 2.0, 0};
    scm_step(field, wheel, params, 1e-3);
    scm_step(field, wheel, params, 1e-3);
    double max_js = 0.0;
    for (int iy = 0; iy < field.ny(); ++iy)
        for (int ix = 0; ix < field.nx(); ++ix) max_js = std::max(max_js, field.shear_accum(ix, iy));
    CHECK(max_js > 0.0);

    wheel.pos.z += 1.0;
    scm_step(field, wheel, params, 1e-3);  // wheel airborne: every node released
    for (int iy = 0; iy < field.ny(); ++iy)
        for (int ix = 0; ix < field.nx(); ++ix) {
            CHECK(field.shear_accum(ix, iy) == 0.0);
            CHECK_FALSE(field.in_contact(ix, iy));
        }
}

TEST_CASE("height field dump carries sinkage and shear state") {
    HeightField field(4, 3, 0.01, 1.0, 2.0, 0.5);
    field.press_to(1, 1, 0.46);
    field.set_shear_accum(1, 1, 0.007);
    const std::string csv = field.to_csv();
    CHECK(csv.find("ix,iy,x,y,z,sinkage,Js") == 0);
    CHECK(csv.find("1,1,1.01,2.01,0.46,") != std::string::npos);
    CHECK(csv.find(",0.007\n") != std::string::npos);
    CHECK(field.sinkage(1, 1) == doctest::Approx(0.04));
    // pressing upward is a no-op
    field.press_to(1, 1, 0.9);
    CHECK(field.elevation(1, 1) == doctest::Approx(0.46));
}
