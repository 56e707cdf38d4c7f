#include "terracal/wheel_rig.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "terracal/io.hpp"

namespace terracal::mob {

double slip_to_omega(double v, double r, double s) {
    if (r <= 0) throw std::invalid_argument("slip_to_omega: wheel radius must be > 0");
    if (s < 0 || s >= 1) throw std::invalid_argument("slip_to_omega: slip must be in [0, 1)");
    return v / (r * (1.0 - s));
}

void WheelRig::validate() const {
    if (wheel_radius <= 0 || wheel_width <= 0)
        throw std::invalid_argument("wheel rig: radius and width must be > 0");
    if (mass <= 0) throw std::invalid_argument("wheel rig: assembly mass must be > 0");
    if (speed <= 0 || duration <= 0)
        throw std::invalid_argument("wheel rig: speed and duration must be > 0");
    if (!(tail_fraction > 0 && tail_fraction <= 1))
        throw std::invalid_argument("wheel rig: tail fraction must be in (0, 1]");
}

static dem::RigidImplement make_wheel(const WheelRig& rig, const Vec3& center) {
    if (!rig.mesh.faces.empty())
        return dem::RigidImplement::mesh_wheel(rig.mesh, center, "wheel");
    return dem::RigidImplement::cylinder_wheel(rig.wheel_radius, rig.wheel_width, center, "wheel");
}

static void finish_result(RunResult& result, const WheelRig& rig, double gravity) {
    const std::size_t n = result.dbp.size();
    const std::size_t tail = std::max<std::size_t>(1, static_cast<std::size_t>(n * rig.tail_fraction));
    double sum = 0.0;
    for (std::size_t k = n - tail; k < n; ++k) sum += result.dbp[k];
    result.steady_dbp = sum / static_cast<double>(tail);
    result.slope_deg =
        std::atan(result.steady_dbp / (rig.mass * gravity)) * 180.0 / std::numbers::pi;
}

RunResult run_scm_wheel(const WheelRig& rig, double slip, const scm::ScmParams& params,
                        const ScmTerrainConfig& terrain, double gravity) {
    rig.validate();
    params.validate();
    const auto t0 = std::chrono::steady_clock::now();

    const int nx = static_cast<int>(terrain.length / terrain.resolution) + 1;
    const int ny = static_cast<int>(terrain.width / terrain.resolution) + 1;
    scm::HeightField field(nx, ny, terrain.resolution);

    const double omega = slip_to_omega(rig.speed, rig.wheel_radius, slip);
    dem::RigidImplement wheel =
        make_wheel(rig, {terrain.start_margin, 0.5 * terrain.width, rig.wheel_radius});
    wheel.lin_vel = {rig.speed, 0, 0};
    wheel.ang_vel = {0, omega, 0};  // rolling forward in +x, z up
    wheel.free_axis = Vec3{0, 0, 1};
    wheel.load_mass = rig.mass;

    RunResult result;
    const long steps = std::lround(rig.duration / terrain.dt);
    for (long s = 0; s < steps; ++s) {
        Vec3 lo, hi;
        wheel.world_aabb(lo, hi);
        if (lo.x < 0 || hi.x > terrain.length || lo.y < 0 || hi.y > terrain.width)
            throw std::runtime_error("scm wheel: wheel left the terrain bounds");

        const scm::ScmWrench wrench = scm::scm_step(field, wheel, params, terrain.dt);

        const double acc = wrench.force.z / rig.mass - gravity;
        wheel.dof_vel += acc * terrain.dt;
        wheel.pos += wheel.velocity() * terrain.dt;
        if (!rig.mesh.faces.empty()) wheel.orient.integrate(wheel.ang_vel, terrain.dt);

        if ((s + 1) % terrain.sample_stride == 0) {
            result.t.push_back((s + 1) * terrain.dt);
            result.dbp.push_back(wrench.force.x);
            result.sinkage.push_back(rig.wheel_radius - wheel.pos.z);
        }
    }
    finish_result(result, rig, gravity);
    result.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

RunResult run_dem_wheel_on_bed(const WheelRig& rig, double slip, const dem::ParticleSystem& bed,
                               const DemBedConfig& cfg) {
    rig.validate();
    const auto t0 = std::chrono::steady_clock::now();

    dem::ParticleSystem sys = bed;
    std::vector<dem::RigidImplement> implements;
    implements.push_back(dem::RigidImplement::half_space({0, 0, 0}, {0, 0, 1}, "floor"));
    implements.push_back(dem::RigidImplement::half_space({0, 0, 0}, {1, 0, 0}, "wall_x0"));
    implements.push_back(dem::RigidImplement::half_space({cfg.bin_x, 0, 0}, {-1, 0, 0}, "wall_x1"));
    implements.push_back(dem::RigidImplement::half_space({0, 0, 0}, {0, 1, 0}, "wall_y0"));
    implements.push_back(dem::RigidImplement::half_space({0, cfg.bin_y, 0}, {0, -1, 0}, "wall_y1"));

    const double surface = bev::bed_surface_height(sys, cfg.bin_x, cfg.bin_y, 0.5 * cfg.bin_x);
    const double x_start = 2.0 * rig.wheel_radius;
    const double travel = rig.speed * rig.duration;
    if (x_start + travel + rig.wheel_radius + 8.0 * cfg.material.radius > cfg.bin_x)
        throw std::invalid_argument("dem wheel: bed too short for the planned travel");

    const double omega = slip_to_omega(rig.speed, rig.wheel_radius, slip);
    dem::RigidImplement wheel = make_wheel(
        rig, {x_start, 0.5 * cfg.bin_y, surface + rig.wheel_radius + 0.2 * cfg.material.radius});
    wheel.lin_vel = {rig.speed, 0, 0};
    wheel.ang_vel = {0, omega, 0};
    wheel.free_axis = Vec3{0, 0, 1};
    wheel.load_mass = rig.mass;
    implements.push_back(wheel);
    const std::size_t wheel_idx = implements.size() - 1;

    dem::DemSolver solver;
    solver.set_threads(cfg.threads);
    const double dt = cfg.dt > 0 ? cfg.dt : dem::stable_dt(cfg.material, 0.5);
    const long steps = std::lround(rig.duration / dt);
    RunResult result;
    for (long s = 0; s < steps; ++s) {
        const auto wrenches = solver.step(sys, implements, dt);
        if ((s + 1) % cfg.sample_stride == 0) {
            result.t.push_back((s + 1) * dt);
            result.dbp.push_back(wrenches[wheel_idx].force.x);
            result.sinkage.push_back(surface - (implements[wheel_idx].pos.z - rig.wheel_radius));
        }
    }
    finish_result(result, rig, cfg.gravity);
    result.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

RunResult run_dem_wheel(const WheelRig& rig, double slip, const DemBedConfig& cfg) {
    bev::RigConfig rc;
    rc.bin_x = cfg.bin_x;
    rc.bin_y = cfg.bin_y;
    rc.particle_count = cfg.particle_count;
    rc.material = cfg.material;
    rc.gravity = {0, 0, -cfg.gravity};
    rc.dt = cfg.dt;
    rc.seed = cfg.seed;
    rc.settle_duration = cfg.settle_duration;
    rc.threads = cfg.threads;
    const auto settled = bev::settle(rc);
    return run_dem_wheel_on_bed(rig, slip, settled.bed, cfg);
}

SweepCurve slip_sweep(const WheelRig& rig, const std::vector<double>& slips, Backend backend,
                      const scm::ScmParams& params, const ScmTerrainConfig& terrain,
                      const DemBedConfig& bed) {
    for (std::size_t k = 0; k < slips.size(); ++k) {
        if (slips[k] < 0 || slips[k] >= 1)
            throw std::invalid_argument("slip_sweep: slips must lie in [0, 1)");
        if (k > 0 && slips[k] <= slips[k - 1])
            throw std::invalid_argument("slip_sweep: slips must be strictly increasing");
    }
    SweepCurve curve;
    curve.backend = backend == Backend::SCM ? "scm" : "dem";

    dem::ParticleSystem settled_bed;
    if (backend == Backend::DEM) {
        bev::RigConfig rc;
        rc.bin_x = bed.bin_x;
        rc.bin_y = bed.bin_y;
        rc.particle_count = bed.particle_count;
        rc.material = bed.material;
        rc.gravity = {0, 0, -bed.gravity};
        rc.dt = bed.dt;
        rc.seed = bed.seed;
        rc.settle_duration = bed.settle_duration;
        rc.threads = bed.threads;
        settled_bed = bev::settle(rc).bed;
    }

    for (double s : slips) {
        const RunResult run = backend == Backend::SCM
                                  ? run_scm_wheel(rig, s, params, terrain, bed.gravity)
                                  : run_dem_wheel_on_bed(rig, s, settled_bed, bed);
        curve.points.push_back({s, run.steady_dbp, run.slope_deg, run.runtime_s});
    }
    return curve;
}

std::string SweepCurve::to_csv() const {
    using io::format_double;
    std::string out = "slip,dbp_N,slope_deg,runtime_s,backend\n";
    for (const SweepPoint& p : points)
        out += format_double(p.slip) + ',' + format_double(p.dbp) + ',' + format_double(p.slope_deg) +
               ',' + format_double(p.runtime_s) + ',' + backend + '\n';
    return out;
}

SweepCurve SweepCurve::from_csv(const std::string& text) {
    SweepCurve curve;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = io::split_csv(line);
        if (f.size() != 5) throw std::runtime_error("curve csv: expected 5 columns");
        curve.points.push_back({io::parse_double(f[0]), io::parse_double(f[1]),
                                io::parse_double(f[2]), io::parse_double(f[3])});
        curve.backend = f[4];
    }
    return curve;
}

CompareReport compare(const SweepCurve& a, const SweepCurve& b) {
    if (a.points.size() != b.points.size())
        throw std::invalid_argument("compare: slip grids differ in size");
    CompareReport report;
    double max_abs_b = 0.0;
    for (const SweepPoint& p : b.points) max_abs_b = std::max(max_abs_b, std::abs(p.dbp));
    bool same_sign = true, monotone_a = true, monotone_b = true;
    for (std::size_t k = 0; k < a.points.size(); ++k) {
        if (a.points[k].slip != b.points[k].slip)
            throw std::invalid_argument("compare: slip grids do not match");
        CompareRow row;
        row.slip = a.points[k].slip;
        row.dbp_a = a.points[k].dbp;
        row.dbp_b = b.points[k].dbp;
        row.delta_dbp = row.dbp_a - row.dbp_b;
        row.slope_a = a.points[k].slope_deg;
        row.slope_b = b.points[k].slope_deg;
        row.delta_slope = row.slope_a - row.slope_b;
        if (max_abs_b > 0)
            report.max_rel_deviation = std::max(report.max_rel_deviation,
                                                std::abs(row.delta_dbp) / max_abs_b);
        // sign agreement only judged where the signal is distinguishable from zero
        if (std::abs(row.dbp_a) > 0.02 * max_abs_b && std::abs(row.dbp_b) > 0.02 * max_abs_b &&
            row.dbp_a * row.dbp_b < 0)
            same_sign = false;
        if (k > 0) {
            monotone_a = monotone_a && a.points[k].dbp >= a.points[k - 1].dbp - 1e-9;
            monotone_b = monotone_b && b.points[k].dbp >= b.points[k - 1].dbp - 1e-9;
        }
        report.rows.push_back(row);
    }
    report.same_sign_and_monotone = same_sign && monotone_a == monotone_b;
    return report;
}

std::string CompareReport::to_text() const {
    using io::format_double;
    std::string out = "slip,dbp_a,dbp_b,delta_dbp,slope_a,slope_b,delta_slope\n";
    for (const CompareRow& r : rows)
        out += format_double(r.slip) + ',' + format_double(r.dbp_a) + ',' + format_double(r.dbp_b) +
               ',' + format_double(r.delta_dbp) + ',' + format_double(r.slope_a) + ',' +
               format_double(r.slope_b) + ',' + format_double(r.delta_slope) + '\n';
    out += "max_rel_deviation," + format_double(max_rel_deviation) + '\n';
    out += std::string("qualitative_agreement,") + (same_sign_and_monotone ? "yes" : "no") + '\n';
    return out;
}

}  // namespace terracal::mob
