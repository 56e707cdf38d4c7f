#pragma once

#include <vector>

#include "terracal/contact.hpp"
#include "terracal/implement.hpp"
#include "terracal/particle_system.hpp"

namespace terracal::dem {

// Broad phase: uniform-grid build of a Verlet neighbor list (pairs within
// 2r + skin), refreshed only when some particle has moved more than skin/2
// since the last build. Emits exactly the overlapping pairs, sorted by
// indices, so the result is identical to a per-step grid or all-pairs scan.
class NeighborGrid {
  public:
    void find_contacts(const ParticleSystem& sys, const std::vector<RigidImplement>& implements,
                       std::vector<ContactCandidate>& out);
    void invalidate() { ref_pos_.clear(); }

  private:
    void rebuild(const ParticleSystem& sys);

    double skin_ = 0.0;
    std::vector<Vec3> ref_pos_;            // positions at the last rebuild
    std::vector<std::uint32_t> list_;      // CSR neighbor indices, j > i, ascending
    std::vector<std::uint32_t> list_start_;

    // grid scratch
    std::vector<int> cell_start_;
    std::vector<int> cell_count_;
    std::vector<int> order_;
    std::vector<int> cell_of_;
};

// O(N^2) reference broad phase, for the grid-equivalence oracle
void brute_force_contacts(const ParticleSystem& sys, const std::vector<RigidImplement>& implements,
                          std::vector<ContactCandidate>& out);

// shared narrow phase
bool make_pair_candidate(const ParticleSystem& sys, std::uint32_t i, std::uint32_t j,
                         ContactCandidate& c);
void implement_contacts(const ParticleSystem& sys, const std::vector<RigidImplement>& implements,
                        std::vector<ContactCandidate>& out);

}  // namespace terracal::dem
