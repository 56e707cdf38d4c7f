#pragma once

#include <string>
#include <vector>

#include "terracal/heightfield.hpp"
#include "terracal/implement.hpp"
#include "terracal/vec3.hpp"

namespace terracal::scm {

// The six calibration targets of the soil contact model.
struct ScmParams {
    double Kc = 0.0;      // cohesive modulus, N/m^(n+1)
    double Kphi = 0.0;    // frictional modulus, N/m^(n+2)
    double n = 1.0;       // sinkage exponent
    double c = 0.0;       // cohesion, Pa
    double phi_deg = 0.0; // internal friction angle, degrees
    double Ks = 1.0;      // Janosi shear modulus, m

    void validate() const;

    // key-value file with keys Kc, Kphi, n, c, phi_deg, Ks
    std::string serialize() const;
    static ScmParams parse(const std::string& text);
    static ScmParams table_defaults();  // bundled calibrated reference values
};

// Bekker-Wong pressure p = (Kc/b + Kphi) z^n. Throws when the effective modulus
// Kc/b + Kphi is not positive (unphysical parameter/patch combination).
double bekker_pressure(double z, double b, const ScmParams& params);

// Janosi-Hanamoto shear tau = (c + p tan(phi)) (1 - exp(-Js/Ks))
double janosi_shear(double p, double Js, const ScmParams& params);

struct PatchNode {
    int ix = 0, iy = 0;
    double z = 0.0;        // total sinkage below the undeformed surface, m
    double surface_z = 0.0;  // wheel surface height at the node
    Vec3 slip_vel;         // tangential velocity of the wheel surface at the node
};

struct ContactPatch {
    std::vector<PatchNode> nodes;
    double area = 0.0;       // m^2
    double perimeter = 0.0;  // m
    double b = 0.0;          // 2 area / perimeter
    bool empty() const { return nodes.empty(); }
};

// Vertical ray casting of grid nodes against the wheel's lower surface. A node is
// active when the wheel surface dips below the current terrain level; its sinkage
// is measured from the undeformed level. Area from the active-node count,
// perimeter from the active/inactive boundary edge count, b = 2A/L (resolution/2
// fallback when the perimeter degenerates). Disjoint components are merged.
ContactPatch raycast_patch(const HeightField& field, const dem::RigidImplement& wheel);

// One SCM step: patch detection, Bekker normal pressure along the vertical,
// Janosi shear against the per-node slip accumulator, plastic terrain update.
// Returns the wrench on the wheel (torque about the wheel center).
struct ScmWrench {
    Vec3 force;
    Vec3 torque;
};
ScmWrench scm_step(HeightField& field, const dem::RigidImplement& wheel, const ScmParams& params,
                   double dt);

}  // namespace terracal::scm
