#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "terracal/material.hpp"
#include "terracal/vec3.hpp"

namespace terracal::dem {

// One overlapping pair found by the broad phase.
// `normal` is the outward contact normal on particle i (it points from the other
// body toward particle i), so the repulsive normal force on i acts along +normal.
struct ContactCandidate {
    enum class Kind : std::uint8_t { ParticleParticle, ParticleImplement };
    Kind kind = Kind::ParticleParticle;
    std::uint32_t i = 0;        // particle index
    std::uint32_t j = 0;        // second particle, or implement index
    std::uint32_t feature = 0;  // mesh triangle for implement contacts
    double overlap = 0.0;       // delta > 0
    Vec3 normal;
    Vec3 point;                 // contact point, world

    std::uint64_t key() const {
        if (kind == Kind::ParticleParticle)
            return (static_cast<std::uint64_t>(i) << 32) | j;
        return (1ull << 63) | (static_cast<std::uint64_t>(i) << 40) |
               (static_cast<std::uint64_t>(j & 0xff) << 32) | feature;
    }
};

// delta = r_i + r_j - |pos_j - pos_i|; negative when separated
inline double overlap(const Vec3& pos_i, const Vec3& pos_j, double r_i, double r_j) {
    const double d = (pos_j - pos_i).norm();
    if (d == 0.0) throw std::invalid_argument("overlap: coincident sphere centers");
    return r_i + r_j - d;
}

// 1/R_eff = 1/r_i + 1/r_j, 1/m_eff = 1/m_i + 1/m_j.
// Pass infinity for an implement side (R_eff = r_i, m_eff = m_i).
inline void effective_pair(double r_i, double r_j, double m_i, double m_j, double& r_eff,
                           double& m_eff) {
    const double inf = std::numeric_limits<double>::infinity();
    r_eff = (r_j == inf) ? r_i : (r_i * r_j) / (r_i + r_j);
    m_eff = (m_j == inf) ? m_i : (m_i * m_j) / (m_i + m_j);
}

// Relative velocity of particle i with respect to the other body at the contact
// point, split into normal and tangential parts (v_n + v_t = v, v_n || normal).
inline void relative_velocities(const Vec3& v_i, const Vec3& w_i, const Vec3& pos_i, const Vec3& v_j,
                                const Vec3& w_j, const Vec3& pos_j, const Vec3& point, const Vec3& normal,
                                Vec3& v_n, Vec3& v_t) {
    const Vec3 v = (v_i + w_i.cross(point - pos_i)) - (v_j + w_j.cross(point - pos_j));
    v_n = normal * v.dot(normal);
    v_t = v - v_n;
}

// Hertz-Mindlin normal force on particle i:
//   F_n = sqrt(delta/2R) (k_n delta n - gamma_n m_eff v_n) - f_c n
// with the cohesion pulling the bodies together.
inline Vec3 normal_force(double delta, double r_eff, double m_eff, const Vec3& v_n, const Vec3& n,
                         const MaterialParams& p) {
    if (delta <= 0.0) throw std::invalid_argument("normal_force: requires overlap > 0");
    const double hertz = std::sqrt(delta / (2.0 * r_eff));
    return hertz * (n * (p.k_n * delta) - v_n * (p.gamma_n * m_eff)) - n * p.f_c;
}

// Two-step tangential history update: advect by v_t dt, re-project into the contact
// plane, then apply the Coulomb cap k_t |u| <= mu_s k_n delta.
inline Vec3 update_tangential_displacement(const Vec3& u_prev, const Vec3& v_t, const Vec3& n,
                                           double delta, double dt, const MaterialParams& p) {
    Vec3 u = u_prev + v_t * dt;
    u -= n * n.dot(u);
    const double mag = u.norm();
    const double cap = p.mu_s * p.k_n * delta / p.k_t;
    if (mag > cap && mag > 0.0) u *= cap / mag;
    return u;
}

// F_t = sqrt(delta/2R) (-k_t u_t - gamma_t m_eff v_t), on particle i
inline Vec3 tangential_force(double delta, double r_eff, double m_eff, const Vec3& v_t,
                             const Vec3& u_t, const MaterialParams& p) {
    const double hertz = std::sqrt(delta / (2.0 * r_eff));
    return hertz * (u_t * (-p.k_t) - v_t * (p.gamma_t * m_eff));
}

inline constexpr double kRollingOmegaEps = 1e-8;  // rad/s, below which M_rr = 0

// M_rr = (w_rel/|w_rel|) mu_r R_eff |F_n|, w_rel = w_i - w_j.
// The solver applies it resisting relative spin (-M_rr on i, +M_rr on j).
inline Vec3 rolling_torque(const Vec3& w_i, const Vec3& w_j, double r_eff, const Vec3& f_n,
                           const MaterialParams& p) {
    const Vec3 w_rel = w_i - w_j;
    const double w = w_rel.norm();
    if (w < kRollingOmegaEps) return {};
    return w_rel * (p.mu_r * r_eff * f_n.norm() / w);
}

// Per-contact tangential displacement history; an entry exists iff the pair was
// in contact on the previous step. Stored as a flat map sorted by contact key:
// the broad phase emits candidates in key order, so the per-step carry-over is a
// single linear merge instead of hashing.
class ContactLedger {
  public:
    struct Entry {
        std::uint64_t key = 0;
        Vec3 u_t;
    };

    const Vec3* find(std::uint64_t key) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                                   [](const Entry& e, std::uint64_t k) { return e.key < k; });
        return (it != entries_.end() && it->key == key) ? &it->u_t : nullptr;
    }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    void clear() { entries_.clear(); }
    std::vector<Entry>& entries() { return entries_; }
    const std::vector<Entry>& entries() const { return entries_; }
    void swap(ContactLedger& other) { entries_.swap(other.entries_); }

  private:
    std::vector<Entry> entries_;
};

}  // namespace terracal::dem
