#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "terracal/bevameter.hpp"
#include "terracal/scm.hpp"

namespace terracal::mob {

// omega = v / (r (1 - s)); throws for s >= 1 or r <= 0
double slip_to_omega(double v, double r, double s);

// Slip-controlled single wheel: constant forward speed, constant spin, free
// vertical motion under the assembly weight.
struct WheelRig {
    double wheel_radius = 0.47;  // m
    double wheel_width = 0.3;    // m
    dem::TriMesh mesh;           // non-empty = mesh wheel (radius still used for slip->omega)
    double mass = 20.0;          // kg on the vertical DOF
    double speed = 1.0;          // m/s
    double duration = 4.0;       // s
    double tail_fraction = 0.3;  // steady-state averaging window
    void validate() const;
};

struct RunResult {
    std::vector<double> t;
    std::vector<double> dbp;      // horizontal soil force on the wheel, +forward, N
    std::vector<double> sinkage;  // lowest wheel point below the initial surface, m
    double steady_dbp = 0.0;      // tail-window mean
    double slope_deg = 0.0;       // arctan(steady_dbp / (mass g))
    double runtime_s = 0.0;       // wall clock
};

struct ScmTerrainConfig {
    double length = 6.5;      // m
    double width = 1.0;       // m
    double resolution = 0.01; // m per node
    double dt = 1e-3;         // s
    double start_margin = 0.8;  // m of terrain behind the start position
    int sample_stride = 5;
};

RunResult run_scm_wheel(const WheelRig& rig, double slip, const scm::ScmParams& params,
                        const ScmTerrainConfig& terrain, double gravity = 9.81);

struct DemBedConfig {
    double bin_x = 1.0;
    double bin_y = 0.25;
    std::size_t particle_count = 30000;
    dem::MaterialParams material;
    double gravity = 9.81;
    double dt = 0.0;  // auto
    std::uint64_t seed = 42;
    double settle_duration = 10.0;
    int sample_stride = 50;
    int threads = 1;
};

// settles a fresh bed internally
RunResult run_dem_wheel(const WheelRig& rig, double slip, const DemBedConfig& bed);
// reuses a pre-settled bed (each run copies it)
RunResult run_dem_wheel_on_bed(const WheelRig& rig, double slip, const dem::ParticleSystem& bed,
                               const DemBedConfig& cfg);

enum class Backend { SCM, DEM };

struct SweepPoint {
    double slip = 0.0;
    double dbp = 0.0;
    double slope_deg = 0.0;
    double runtime_s = 0.0;
};

struct SweepCurve {
    std::string backend;
    std::vector<SweepPoint> points;
    std::string to_csv() const;  // slip,dbp_N,slope_deg,runtime_s,backend
    static SweepCurve from_csv(const std::string& text);
};

// One run per slip (slips strictly increasing in [0,1)). The DEM backend settles
// its bed once and reuses it across slips.
SweepCurve slip_sweep(const WheelRig& rig, const std::vector<double>& slips, Backend backend,
                      const scm::ScmParams& params, const ScmTerrainConfig& terrain,
                      const DemBedConfig& bed);

struct CompareRow {
    double slip = 0.0;
    double dbp_a = 0.0, dbp_b = 0.0, delta_dbp = 0.0;
    double slope_a = 0.0, slope_b = 0.0, delta_slope = 0.0;
};

struct CompareReport {
    std::vector<CompareRow> rows;
    double max_rel_deviation = 0.0;  // max |delta dbp| / max |dbp_b|
    bool same_sign_and_monotone = false;
    std::string to_text() const;
};

// pointwise A - B; throws on mismatched slip grids
CompareReport compare(const SweepCurve& a, const SweepCurve& b);

}  // namespace terracal::mob
