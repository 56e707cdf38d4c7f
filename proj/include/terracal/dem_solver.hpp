#pragma once

#include <cstddef>
#include <vector>

#include "terracal/contact.hpp"
#include "terracal/implement.hpp"
#include "terracal/neighbor_grid.hpp"
#include "terracal/particle_system.hpp"

namespace terracal::dem {

// Reaction on one implement: exact negative sum of the contact loads it applies
// to the particles. Torque is about the implement's pose origin.
struct Wrench {
    Vec3 force;
    Vec3 torque;
};

// Largest stable step for the explicit integrator: safety * 0.1 * sqrt(m/k_n)
// (Hertzian contact-time heuristic with a suspension factor of 0.1).
double stable_dt(const MaterialParams& mat, double safety = 1.0);

// Penalty DEM solver: Hertz-Mindlin contacts with tangential history, Coulomb
// capping and rolling resistance, advanced by semi-implicit Euler. Single
// instance per ParticleSystem; optional threading parallelizes the force pass
// only (accumulation stays in sorted contact order, so results are identical
// for any thread count).
class DemSolver {
  public:
    // advances particles, tangential history and implement poses/free DOFs by dt;
    // returns one wrench per implement. Throws on dt above the stability bound or
    // non-finite state (naming the first offending particle).
    std::vector<Wrench> step(ParticleSystem& sys, std::vector<RigidImplement>& implements, double dt);

    void set_threads(int n) { threads_ = n < 1 ? 1 : n; }

    const ContactLedger& ledger() const { return ledger_; }
    const std::vector<ContactCandidate>& last_contacts() const { return candidates_; }

  private:
    NeighborGrid grid_;
    ContactLedger ledger_;
    ContactLedger next_ledger_;
    std::vector<ContactCandidate> candidates_;
    struct PairLoad {
        Vec3 f_total;  // on particle i
        Vec3 f_t;
        Vec3 m_rr;
        Vec3 u_t;
    };
    std::vector<PairLoad> loads_;
    std::vector<Vec3> force_;
    std::vector<Vec3> torque_;
    int threads_ = 1;
};

// Convenience wrapper for repeated stepping with a wrench log (one row per
// implement every `stride` steps).
struct WrenchLog {
    std::vector<double> t;
    std::vector<std::vector<Wrench>> rows;
    std::string to_csv(std::size_t implement_index) const;  // t,fx,fy,fz,tx,ty,tz
};

}  // namespace terracal::dem
