#pragma once

#include <string>
#include <vector>

namespace terracal::bev {

struct SinkagePoint {
    double plate_r = 0.0;
    double z = 0.0;
    double force = 0.0;
};
struct SteadyPoint {
    double load_kg = 0.0;
    double torque = 0.0;
};
struct TransientPoint {
    double load_kg = 0.0;
    double t = 0.0;
    double torque = 0.0;
};

// Bevameter ground truth consumed by the calibrator. The [meta] block carries
// what the torque forward model needs; absent keys default to the reference
// rig (g = 9.81, annulus 0.45/0.6 m, 1 deg/s).
struct GroundTruthSet {
    std::vector<SinkagePoint> sinkage;      // grouped by plate, z ascending within a plate
    std::vector<SteadyPoint> steady;        // loads ascending
    std::vector<TransientPoint> transient;  // grouped by sample time, loads ascending
    double gravity = 9.81;
    double annulus_r_inner = 0.45;
    double annulus_r_outer = 0.6;
    double omega_deg_s = 1.0;
    std::vector<double> plate_radii;

    void validate() const;
    std::string to_csv() const;
    static GroundTruthSet from_csv(const std::string& text);
};

}  // namespace terracal::bev
