#pragma once

#include <cstdint>
#include <vector>

#include "terracal/dem_solver.hpp"
#include "terracal/forward_models.hpp"
#include "terracal/ground_truth.hpp"
#include "terracal/particle_system.hpp"

namespace terracal::bev {

// Common rig setup: box bin with the soil bed, paper material, one implement.
struct RigConfig {
    double bin_x = 2.0;
    double bin_y = 2.0;
    std::size_t particle_count = 10000;
    dem::MaterialParams material;
    Vec3 gravity{0, 0, -9.81};
    double dt = 0.0;  // 0 = auto (half the stability bound)
    std::uint64_t seed = 42;
    int sample_stride = 20;
    double settle_duration = 15.0;     // s, cap
    double settle_ke_threshold = 1e-8; // J per particle
    double smooth_window = 0.2;        // s, centered moving average before sampling
    int threads = 1;

    double resolved_dt() const;
    // implement footprint must clear the walls by >= 4 particle diameters
    void check_footprint(double implement_outer_radius) const;
};

struct SettleResult {
    dem::ParticleSystem bed;
    double mean_ke = 0.0;
    bool reached_threshold = false;
    double simulated_time = 0.0;
    std::vector<double> ke_t;        // KE checkpoints
    std::vector<double> ke_history;  // J per particle
};

// Gravity settling until the kinetic-energy threshold or the duration cap.
SettleResult settle(const RigConfig& config);

// highest particle top (z + r) within radial `footprint` of the bin center
double bed_surface_height(const dem::ParticleSystem& bed, double bin_x, double bin_y,
                          double footprint);

struct SinkageSeries {
    double plate_radius = 0.0;
    double press_speed = 0.0;
    std::vector<double> z;      // sinkage below the initial surface, m
    std::vector<double> force;  // vertical soil force on the plate, N (positive up)
};

// Plate pressed down at constant speed until `target_depth`; one sample per stride.
SinkageSeries plate_sinkage_test(const dem::ParticleSystem& bed, const RigConfig& config,
                                 double plate_radius, double press_speed, double target_depth);

struct TorqueSeries {
    double load_kg = 0.0;
    double omega = 0.0;         // rad/s
    std::vector<double> t;      // s from rotation start
    std::vector<double> torque; // motor torque resisting rotation, N m
};

// Annulus under a dead load, free vertically, spun at constant omega.
TorqueSeries annulus_shear_test(const dem::ParticleSystem& bed, const RigConfig& config,
                                const AnnulusGeom& geom, double thickness, double load_kg,
                                double omega, double duration);

// centered moving average over a window in the abscissa units
std::vector<double> smooth_series(const std::vector<double>& x, const std::vector<double>& y,
                                  double window);

// linear interpolation; throws when xq is outside [x.front(), x.back()]
double interp_series(const std::vector<double>& x, const std::vector<double>& y, double xq);

// Assemble the calibration tables: smooth each series, interpolate at the requested
// sinkage depths / sample times, average sinkage forces over press-speed replicates.
GroundTruthSet sample_ground_truth(const std::vector<SinkageSeries>& sinkage_runs,
                                   const std::vector<TorqueSeries>& shear_runs,
                                   const std::vector<double>& depths,
                                   const std::vector<double>& transient_times, double steady_time,
                                   const RigConfig& config, const AnnulusGeom& geom,
                                   double smooth_window_s);

}  // namespace terracal::bev
