#include "terracal/neighbor_grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace terracal::dem {

bool make_pair_candidate(const ParticleSystem& sys, std::uint32_t i, std::uint32_t j,
                         ContactCandidate& c) {
    const double r = sys.material.radius;
    const Vec3 d = sys.pos[i] - sys.pos[j];
    const double dist2 = d.norm2();
    const double two_r = 2.0 * r;
    if (dist2 >= two_r * two_r || dist2 == 0.0) return false;
    const double dist = std::sqrt(dist2);
    c.kind = ContactCandidate::Kind::ParticleParticle;
    c.i = i;
    c.j = j;
    c.feature = 0;
    c.overlap = two_r - dist;
    c.normal = d / dist;  // from j toward i
    c.point = sys.pos[j] + c.normal * (r - 0.5 * c.overlap);
    return true;
}

// particle-major so the emitted block stays sorted by contact key
void implement_contacts(const ParticleSystem& sys, const std::vector<RigidImplement>& implements,
                        std::vector<ContactCandidate>& out) {
    const double r = sys.material.radius;
    std::vector<std::array<Vec3, 2>> boxes(implements.size());
    for (std::size_t b = 0; b < implements.size(); ++b) {
        implements[b].world_aabb(boxes[b][0], boxes[b][1]);
        boxes[b][0] -= Vec3{r, r, r};
        boxes[b][1] += Vec3{r, r, r};
    }
    for (std::uint32_t i = 0; i < sys.size(); ++i) {
        const Vec3& p = sys.pos[i];
        for (std::uint32_t b = 0; b < implements.size(); ++b) {
            const Vec3& lo = boxes[b][0];
            const Vec3& hi = boxes[b][1];
            if (p.x < lo.x || p.x > hi.x || p.y < lo.y || p.y > hi.y || p.z < lo.z || p.z > hi.z)
                continue;
            auto hit = implements[b].query(p, r);
            if (!hit || hit->distance >= r) continue;
            ContactCandidate c;
            c.kind = ContactCandidate::Kind::ParticleImplement;
            c.i = i;
            c.j = b;
            c.feature = hit->feature;
            c.overlap = r - hit->distance;
            c.normal = hit->normal;
            c.point = hit->point;
            out.push_back(c);
        }
    }
}

void NeighborGrid::rebuild(const ParticleSystem& sys) {
    const std::size_t n = sys.size();
    skin_ = 0.2 * sys.material.radius;
    ref_pos_ = sys.pos;

    const double cell = 2.0 * sys.material.radius + skin_;
    Vec3 lo = sys.pos[0];
    Vec3 hi = sys.pos[0];
    for (const Vec3& p : sys.pos) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    // one ghost layer on each side removes bounds checks in the 27-cell scan
    const int nx = static_cast<int>((hi.x - lo.x) / cell) + 3;
    const int ny = static_cast<int>((hi.y - lo.y) / cell) + 3;
    const int nz = static_cast<int>((hi.z - lo.z) / cell) + 3;
    const std::size_t ncells = static_cast<std::size_t>(nx) * ny * nz;

    cell_of_.resize(n);
    cell_count_.assign(ncells, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const int ix = static_cast<int>((sys.pos[i].x - lo.x) / cell) + 1;
        const int iy = static_cast<int>((sys.pos[i].y - lo.y) / cell) + 1;
        const int iz = static_cast<int>((sys.pos[i].z - lo.z) / cell) + 1;
        cell_of_[i] = (iz * ny + iy) * nx + ix;
        ++cell_count_[cell_of_[i]];
    }
    cell_start_.resize(ncells + 1);
    cell_start_[0] = 0;
    for (std::size_t c = 0; c < ncells; ++c) cell_start_[c + 1] = cell_start_[c] + cell_count_[c];
    order_.resize(n);
    std::vector<int>& fill = cell_count_;  // reuse as cursor
    std::copy(cell_start_.begin(), cell_start_.end() - 1, fill.begin());
    for (std::size_t i = 0; i < n; ++i) order_[fill[cell_of_[i]]++] = static_cast<int>(i);
    // order_ within each cell is ascending because particles are visited in index order

    int offsets[27];
    int noff = 0;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) offsets[noff++] = (dz * ny + dy) * nx + dx;

    const double reach2 = cell * cell;
    list_.clear();
    list_.reserve(n * 16);
    list_start_.assign(n + 1, 0);
    std::vector<std::uint32_t> neigh;
    neigh.reserve(64);
    for (std::uint32_t i = 0; i < n; ++i) {
        neigh.clear();
        const int ci = cell_of_[i];
        for (int k = 0; k < 27; ++k) {
            const int cj = ci + offsets[k];
            for (int s = cell_start_[cj]; s < cell_start_[cj + 1]; ++s) {
                const std::uint32_t j = static_cast<std::uint32_t>(order_[s]);
                if (j > i && (sys.pos[j] - sys.pos[i]).norm2() < reach2) neigh.push_back(j);
            }
        }
        std::sort(neigh.begin(), neigh.end());
        list_.insert(list_.end(), neigh.begin(), neigh.end());
        list_start_[i + 1] = static_cast<std::uint32_t>(list_.size());
    }
}

void NeighborGrid::find_contacts(const ParticleSystem& sys,
                                 const std::vector<RigidImplement>& implements,
                                 std::vector<ContactCandidate>& out) {
    out.clear();
    const std::size_t n = sys.size();
    if (n > 0) {
        bool fresh = ref_pos_.size() == n;
        if (fresh) {
            const double limit2 = 0.25 * skin_ * skin_;
            for (std::size_t i = 0; i < n; ++i) {
                if ((sys.pos[i] - ref_pos_[i]).norm2() > limit2) {
                    fresh = false;
                    break;
                }
            }
        }
        if (!fresh) rebuild(sys);

        ContactCandidate c;
        for (std::uint32_t i = 0; i < n; ++i)
            for (std::uint32_t s = list_start_[i]; s < list_start_[i + 1]; ++s)
                if (make_pair_candidate(sys, i, list_[s], c)) out.push_back(c);
    }
    implement_contacts(sys, implements, out);
}

void brute_force_contacts(const ParticleSystem& sys, const std::vector<RigidImplement>& implements,
                          std::vector<ContactCandidate>& out) {
    out.clear();
    ContactCandidate c;
    for (std::uint32_t i = 0; i < sys.size(); ++i)
        for (std::uint32_t j = i + 1; j < sys.size(); ++j)
            if (make_pair_candidate(sys, i, j, c)) out.push_back(c);
    implement_contacts(sys, implements, out);
}

}  // namespace terracal::dem
