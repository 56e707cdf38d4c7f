#include "terracal/bevameter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "terracal/forward_models.hpp"

namespace terracal::bev {

double RigConfig::resolved_dt() const {
    return dt > 0.0 ? dt : dem::stable_dt(material, 0.5);
}

void RigConfig::check_footprint(double implement_outer_radius) const {
    const double clearance = 0.5 * std::min(bin_x, bin_y) - implement_outer_radius;
    if (clearance < 8.0 * material.radius)
        throw std::invalid_argument("rig: implement footprint too close to the bin walls");
}

static std::vector<dem::RigidImplement> bin_walls(double bin_x, double bin_y) {
    using dem::RigidImplement;
    std::vector<RigidImplement> walls;
    walls.push_back(RigidImplement::half_space({0, 0, 0}, {0, 0, 1}, "floor"));
    walls.push_back(RigidImplement::half_space({0, 0, 0}, {1, 0, 0}, "wall_x0"));
    walls.push_back(RigidImplement::half_space({bin_x, 0, 0}, {-1, 0, 0}, "wall_x1"));
    walls.push_back(RigidImplement::half_space({0, 0, 0}, {0, 1, 0}, "wall_y0"));
    walls.push_back(RigidImplement::half_space({0, bin_y, 0}, {0, -1, 0}, "wall_y1"));
    return walls;
}

SettleResult settle(const RigConfig& config) {
    SettleResult result;
    result.bed = dem::seed_lattice(config.particle_count, config.bin_x, config.bin_y,
                                   config.material, config.gravity, config.seed);
    if (config.particle_count == 0) {
        result.reached_threshold = true;
        return result;
    }
    auto walls = bin_walls(config.bin_x, config.bin_y);
    dem::DemSolver solver;
    solver.set_threads(config.threads);
    const double dt = config.resolved_dt();
    const long steps = std::lround(config.settle_duration / dt);
    const long check_every = std::max<long>(1, std::lround(0.02 / dt));
    // the seeded lattice starts at rest: ignore the threshold until it has
    // actually dropped and converted some potential energy
    const double min_time = std::min(0.25, 0.25 * config.settle_duration);
    for (long s = 0; s < steps; ++s) {
        solver.step(result.bed, walls, dt);
        result.simulated_time += dt;
        if ((s + 1) % check_every == 0) {
            result.mean_ke = result.bed.mean_kinetic_energy();
            result.ke_t.push_back(result.simulated_time);
            result.ke_history.push_back(result.mean_ke);
            if (result.simulated_time >= min_time && result.mean_ke < config.settle_ke_threshold) {
                result.reached_threshold = true;
                return result;
            }
        }
    }
    result.mean_ke = result.bed.mean_kinetic_energy();
    result.reached_threshold = result.mean_ke < config.settle_ke_threshold;
    return result;
}

double bed_surface_height(const dem::ParticleSystem& bed, double bin_x, double bin_y,
                          double footprint) {
    const double cx = 0.5 * bin_x, cy = 0.5 * bin_y;
    double top = 0.0;
    for (const Vec3& p : bed.pos) {
        const double dx = p.x - cx, dy = p.y - cy;
        if (dx * dx + dy * dy <= footprint * footprint)
            top = std::max(top, p.z + bed.material.radius);
    }
    return top;
}

SinkageSeries plate_sinkage_test(const dem::ParticleSystem& bed, const RigConfig& config,
                                 double plate_radius, double press_speed, double target_depth) {
    if (press_speed <= 0) throw std::invalid_argument("plate test: press speed must be > 0");
    config.check_footprint(plate_radius);

    SinkageSeries series;
    series.plate_radius = plate_radius;
    series.press_speed = press_speed;

    dem::ParticleSystem sys = bed;  // each run starts from the same settled bed
    auto implements = bin_walls(config.bin_x, config.bin_y);
    const double surface0 = bed_surface_height(sys, config.bin_x, config.bin_y, plate_radius);
    auto plate = dem::RigidImplement::plate(
        plate_radius, {0.5 * config.bin_x, 0.5 * config.bin_y, surface0 + 0.5 * sys.material.radius},
        "plate");
    plate.lin_vel = {0, 0, -press_speed};
    implements.push_back(plate);
    const std::size_t plate_idx = implements.size() - 1;

    dem::DemSolver solver;
    solver.set_threads(config.threads);
    const double dt = config.resolved_dt();
    long step_count = 0;
    while (true) {
        const auto wrenches = solver.step(sys, implements, dt);
        ++step_count;
        const double sink = surface0 - implements[plate_idx].pos.z;
        if (step_count % config.sample_stride == 0 && sink >= 0.0) {
            series.z.push_back(sink);
            series.force.push_back(wrenches[plate_idx].force.z);
        }
        if (sink >= target_depth) break;
    }
    return series;
}

TorqueSeries annulus_shear_test(const dem::ParticleSystem& bed, const RigConfig& config,
                                const AnnulusGeom& geom, double thickness, double load_kg,
                                double omega, double duration) {
    if (load_kg <= 0) throw std::invalid_argument("annulus test: load must be > 0");
    if (omega <= 0) throw std::invalid_argument("annulus test: angular speed must be > 0");
    config.check_footprint(geom.r_outer);

    TorqueSeries series;
    series.load_kg = load_kg;
    series.omega = omega;

    dem::ParticleSystem sys = bed;
    auto implements = bin_walls(config.bin_x, config.bin_y);
    const double surface0 = bed_surface_height(sys, config.bin_x, config.bin_y, geom.r_outer);
    auto ring = dem::RigidImplement::annulus(
        geom.r_inner, geom.r_outer, thickness,
        {0.5 * config.bin_x, 0.5 * config.bin_y, surface0 + 0.5 * thickness + 0.2 * sys.material.radius},
        "annulus");
    ring.ang_vel = {0, 0, omega};
    ring.free_axis = Vec3{0, 0, 1};
    ring.load_mass = load_kg;
    implements.push_back(ring);
    const std::size_t ring_idx = implements.size() - 1;

    dem::DemSolver solver;
    solver.set_threads(config.threads);
    const double dt = config.resolved_dt();
    const long steps = std::lround(duration / dt);
    for (long s = 0; s < steps; ++s) {
        const auto wrenches = solver.step(sys, implements, dt);
        if ((s + 1) % config.sample_stride == 0) {
            series.t.push_back((s + 1) * dt);
            series.torque.push_back(-wrenches[ring_idx].torque.z);  // motor torque, resisting
        }
    }
    return series;
}

std::vector<double> smooth_series(const std::vector<double>& x, const std::vector<double>& y,
                                  double window) {
    if (x.size() != y.size()) throw std::invalid_argument("smooth: length mismatch");
    if (window <= 0) return y;
    std::vector<double> out(y.size());
    const double half = 0.5 * window;
    std::size_t lo = 0, hi = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        while (lo < x.size() && x[lo] < x[k] - half) ++lo;
        while (hi < x.size() && x[hi] <= x[k] + half) ++hi;
        double sum = 0.0;
        for (std::size_t j = lo; j < hi; ++j) sum += y[j];
        out[k] = sum / static_cast<double>(hi - lo);
    }
    return out;
}

double interp_series(const std::vector<double>& x, const std::vector<double>& y, double xq) {
    if (x.size() < 2) throw std::invalid_argument("interp: need at least two samples");
    if (xq < x.front() || xq > x.back())
        throw std::out_of_range("interp: query outside the sampled range");
    const auto it = std::lower_bound(x.begin(), x.end(), xq);
    if (it == x.begin()) return y.front();
    const std::size_t k = static_cast<std::size_t>(it - x.begin());
    const double t = (xq - x[k - 1]) / (x[k] - x[k - 1]);
    return y[k - 1] + t * (y[k] - y[k - 1]);
}

GroundTruthSet sample_ground_truth(const std::vector<SinkageSeries>& sinkage_runs,
                                   const std::vector<TorqueSeries>& shear_runs,
                                   const std::vector<double>& depths,
                                   const std::vector<double>& transient_times, double steady_time,
                                   const RigConfig& config, const AnnulusGeom& geom,
                                   double smooth_window_s) {
    GroundTruthSet gt;
    gt.gravity = -config.gravity.z;
    gt.annulus_r_inner = geom.r_inner;
    gt.annulus_r_outer = geom.r_outer;

    // plates: average F(z) over the press-speed replicates of each radius
    std::vector<double> radii;
    for (const auto& run : sinkage_runs)
        if (std::find(radii.begin(), radii.end(), run.plate_radius) == radii.end())
            radii.push_back(run.plate_radius);
    std::sort(radii.begin(), radii.end());
    gt.plate_radii = radii;
    for (double r : radii) {
        for (double depth : depths) {
            double sum = 0.0;
            int reps = 0;
            for (const auto& run : sinkage_runs) {
                if (run.plate_radius != r) continue;
                const auto smoothed =
                    smooth_series(run.z, run.force, run.press_speed * smooth_window_s);
                sum += interp_series(run.z, smoothed, depth);
                ++reps;
            }
            if (reps == 0) throw std::invalid_argument("sample: no series for plate radius");
            gt.sinkage.push_back({r, depth, sum / reps});
        }
    }

    std::vector<const TorqueSeries*> by_load;
    for (const auto& run : shear_runs) by_load.push_back(&run);
    std::sort(by_load.begin(), by_load.end(),
              [](const TorqueSeries* a, const TorqueSeries* b) { return a->load_kg < b->load_kg; });
    for (const TorqueSeries* run : by_load) {
        const auto smoothed = smooth_series(run->t, run->torque, smooth_window_s);
        gt.steady.push_back({run->load_kg, interp_series(run->t, smoothed, steady_time)});
        if (run->omega > 0) gt.omega_deg_s = run->omega * 180.0 / std::numbers::pi;
    }
    for (double tq : transient_times)
        for (const TorqueSeries* run : by_load) {
            const auto smoothed = smooth_series(run->t, run->torque, smooth_window_s);
            gt.transient.push_back({run->load_kg, tq, interp_series(run->t, smoothed, tq)});
        }

    gt.validate();
    return gt;
}

}  // namespace terracal::bev
