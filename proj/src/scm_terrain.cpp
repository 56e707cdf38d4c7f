#include "terracal/scm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "terracal/io.hpp"

namespace terracal::scm {

void ScmParams::validate() const {
    if (n <= 0) throw std::invalid_argument("scm params: n must be > 0");
    if (Ks <= 0) throw std::invalid_argument("scm params: Ks must be > 0");
    if (!(phi_deg > 0 && phi_deg < 90))
        throw std::invalid_argument("scm params: phi must be in (0, 90) degrees");
}

std::string ScmParams::serialize() const {
    using io::format_double;
    std::string out;
    out += "Kc = " + format_double(Kc) + "\n";
    out += "Kphi = " + format_double(Kphi) + "\n";
    out += "n = " + format_double(n) + "\n";
    out += "c = " + format_double(c) + "\n";
    out += "phi_deg = " + format_double(phi_deg) + "\n";
    out += "Ks = " + format_double(Ks) + "\n";
    return out;
}

ScmParams ScmParams::parse(const std::string& text) {
    const auto cfg = io::Config::parse(text);
    ScmParams p;
    for (const char* key : {"Kc", "Kphi", "n", "c", "phi_deg", "Ks"})
        if (!cfg.has(key)) throw std::runtime_error(std::string("scm params: missing key ") + key);
    p.Kc = cfg.get_num("Kc", 0);
    p.Kphi = cfg.get_num("Kphi", 0);
    p.n = cfg.get_num("n", 0);
    p.c = cfg.get_num("c", 0);
    p.phi_deg = cfg.get_num("phi_deg", 0);
    p.Ks = cfg.get_num("Ks", 0);
    p.validate();
    return p;
}

ScmParams ScmParams::table_defaults() {
    ScmParams p;
    p.Kc = -4957.0;
    p.Kphi = 235605.0;
    p.n = 0.883;
    p.c = 21.872;
    p.phi_deg = 21.259;
    p.Ks = 0.0062;
    return p;
}

double bekker_pressure(double z, double b, const ScmParams& params) {
    if (z < 0) throw std::invalid_argument("bekker_pressure: sinkage must be >= 0");
    if (b <= 0) throw std::invalid_argument("bekker_pressure: characteristic length must be > 0");
    const double modulus = params.Kc / b + params.Kphi;
    if (modulus <= 0)
        throw std::invalid_argument("bekker_pressure: effective modulus Kc/b + Kphi is not positive");
    if (z == 0) return 0.0;
    return modulus * std::pow(z, params.n);
}

double janosi_shear(double p, double Js, const ScmParams& params) {
    const double tau_max = params.c + p * std::tan(params.phi_deg * std::numbers::pi / 180.0);
    return tau_max * (1.0 - std::exp(-Js / params.Ks));
}

ContactPatch raycast_patch(const HeightField& field, const dem::RigidImplement& wheel) {
    ContactPatch patch;
    Vec3 lo, hi;
    wheel.world_aabb(lo, hi);
    const double res = field.resolution();
    const int ix0 = std::max(0, static_cast<int>(std::ceil((lo.x - field.x0()) / res)));
    const int ix1 = std::min(field.nx() - 1, static_cast<int>(std::floor((hi.x - field.x0()) / res)));
    const int iy0 = std::max(0, static_cast<int>(std::ceil((lo.y - field.y0()) / res)));
    const int iy1 = std::min(field.ny() - 1, static_cast<int>(std::floor((hi.y - field.y0()) / res)));
    if (ix1 < ix0 || iy1 < iy0) return patch;

    const int fx = ix1 - ix0 + 1, fy = iy1 - iy0 + 1;
    std::vector<std::uint8_t> active(static_cast<std::size_t>(fx) * fy, 0);

    for (int iy = iy0; iy <= iy1; ++iy) {
        for (int ix = ix0; ix <= ix1; ++ix) {
            const auto surf = wheel.lower_surface_z(field.node_x(ix), field.node_y(iy));
            if (!surf) continue;
            const double elev = field.elevation(ix, iy);
            // equality keeps plastically conformed nodes in contact; a static
            // loaded wheel would otherwise lose its patch one step after the
            // terrain conforms
            if (*surf > elev) continue;
            PatchNode node;
            node.ix = ix;
            node.iy = iy;
            node.surface_z = *surf;
            // undeformed level = current elevation + accumulated plastic sinkage
            node.z = (elev + field.sinkage(ix, iy)) - *surf;
            const Vec3 vs = wheel.velocity_at({field.node_x(ix), field.node_y(iy), *surf});
            node.slip_vel = {vs.x, vs.y, 0.0};  // terrain normal is the global vertical
            patch.nodes.push_back(node);
            active[static_cast<std::size_t>(iy - iy0) * fx + (ix - ix0)] = 1;
        }
    }
    if (patch.nodes.empty()) return patch;

    patch.area = static_cast<double>(patch.nodes.size()) * res * res;
    std::size_t boundary_edges = 0;
    auto is_active = [&](int gx, int gy) {
        if (gx < 0 || gx >= fx || gy < 0 || gy >= fy) return false;
        return active[static_cast<std::size_t>(gy) * fx + gx] != 0;
    };
    for (const PatchNode& node : patch.nodes) {
        const int gx = node.ix - ix0, gy = node.iy - iy0;
        boundary_edges += !is_active(gx - 1, gy);
        boundary_edges += !is_active(gx + 1, gy);
        boundary_edges += !is_active(gx, gy - 1);
        boundary_edges += !is_active(gx, gy + 1);
    }
    patch.perimeter = static_cast<double>(boundary_edges) * res;
    patch.b = patch.perimeter > 0 ? 2.0 * patch.area / patch.perimeter : 0.5 * res;
    return patch;
}

ScmWrench scm_step(HeightField& field, const dem::RigidImplement& wheel, const ScmParams& params,
                   double dt) {
    if (dt <= 0) throw std::invalid_argument("scm_step: dt must be > 0");
    ScmWrench wrench;
    const ContactPatch patch = raycast_patch(field, wheel);
    const double cell_area = field.resolution() * field.resolution();

    // release pass first: nodes that left the patch lose their shear accumulator
    std::vector<std::uint64_t> active_keys;  // sorted: nodes are visited iy-major
    active_keys.reserve(patch.nodes.size());
    for (const PatchNode& n : patch.nodes)
        active_keys.push_back((static_cast<std::uint64_t>(n.iy) << 32) | static_cast<std::uint32_t>(n.ix));
    for (std::uint64_t key : field.contact_keys()) {
        if (!std::binary_search(active_keys.begin(), active_keys.end(), key)) {
            const int ix = static_cast<int>(key & 0xffffffffu);
            const int iy = static_cast<int>(key >> 32);
            field.set_contact(ix, iy, false);
            field.set_shear_accum(ix, iy, 0.0);
        }
    }

    // A freshly touching wheel produces a sliver patch whose b can drive the
    // effective modulus Kc/b + Kphi negative. The soil carries no tension, so
    // such a patch exerts nothing and leaves the terrain alone (it grows within
    // a few steps as the wheel seats itself).
    if (params.Kc / patch.b + params.Kphi <= 0.0) {
        field.set_contact_keys({});
        return wrench;
    }

    for (const PatchNode& node : patch.nodes) {
        const double p = bekker_pressure(node.z, patch.b, params);
        const double js = field.shear_accum(node.ix, node.iy) + node.slip_vel.norm() * dt;
        field.set_shear_accum(node.ix, node.iy, js);
        field.set_contact(node.ix, node.iy, true);

        const double tau = janosi_shear(p, js, params);
        const Vec3 f_n{0.0, 0.0, p * cell_area};
        Vec3 f_t;
        const double slip = node.slip_vel.norm();
        if (slip > 1e-12) f_t = node.slip_vel * (-tau * cell_area / slip);

        const Vec3 at{field.node_x(node.ix), field.node_y(node.iy), node.surface_z};
        wrench.force += f_n + f_t;
        wrench.torque += (at - wheel.pos).cross(f_n + f_t);

        field.press_to(node.ix, node.iy, node.surface_z);
    }
    field.set_contact_keys(std::move(active_keys));
    return wrench;
}

}  // namespace terracal::scm
