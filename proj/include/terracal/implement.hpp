#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "terracal/vec3.hpp"

namespace terracal::dem {

// Closest-point query result against an implement surface.
struct SurfaceHit {
    double distance = 0.0;   // center-to-surface distance; negative when the center is inside the solid
    Vec3 normal;             // outward surface normal at the contact point (points toward the particle)
    Vec3 point;              // surface point
    std::uint32_t feature = 0;  // triangle index for meshes, 0 for analytic shapes
};

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> faces;

    // OBJ-compatible subset: `v x y z` and `f i j k` (1-based, optional /vt/vn suffixes)
    static TriMesh load_obj(const std::string& text);
    void validate() const;  // non-degenerate triangles
    Vec3 face_normal(std::uint32_t f) const;
};

// Uniform grid over mesh triangles (local frame), built once.
class MeshGrid {
  public:
    MeshGrid() = default;
    explicit MeshGrid(const TriMesh& mesh, double cell);
    // triangle indices whose AABB intersects the sphere (center local, radius rad)
    void query(const Vec3& center, double rad, std::vector<std::uint32_t>& out) const;
    bool empty() const { return cells_.empty(); }

  private:
    Vec3 origin_;
    double cell_ = 0.0;
    int nx_ = 0, ny_ = 0, nz_ = 0;
    std::vector<std::vector<std::uint32_t>> cells_;
    std::vector<std::array<Vec3, 2>> tri_aabbs_;
};

enum class ShapeKind { HalfSpace, Plate, Ring, Cylinder, Mesh };

// Rigid body the grains interact with: bin walls, bevameter plate/annulus, wheels.
// Shapes live in a local frame; `pose`/`orient` map local to world.
struct RigidImplement {
    ShapeKind kind = ShapeKind::HalfSpace;

    // HalfSpace: outward normal `axis` through the pose origin.
    // Plate: disc of radius r_outer, normal `axis`.
    // Ring: solid of revolution about `axis`, radial extent [r_inner, r_outer], axial half-extent half_len.
    // Cylinder: Ring with r_inner = 0 (wheel; axis horizontal in the rigs).
    // Mesh: triangles in local frame.
    Vec3 axis{0, 0, 1};   // local
    double r_inner = 0.0;
    double r_outer = 0.0;
    double half_len = 0.0;
    TriMesh mesh;
    MeshGrid mesh_grid;

    Vec3 pos;             // world
    Rot orient;

    // kinematics: prescribed velocities plus at most one free translational DOF
    Vec3 lin_vel;         // prescribed, world (component along free_axis ignored when free DOF present)
    Vec3 ang_vel;         // prescribed, world
    std::optional<Vec3> free_axis;  // unit, world
    double load_mass = 0.0;         // kg, attached to the free DOF
    double dof_vel = 0.0;           // m/s along free_axis

    std::string name;

    void validate() const;

    Vec3 world_axis() const { return orient.rotate(axis); }
    Vec3 velocity() const {
        Vec3 v = lin_vel;
        if (free_axis) v += *free_axis * dof_vel;
        return v;
    }
    Vec3 velocity_at(const Vec3& p) const { return velocity() + ang_vel.cross(p - pos); }

    // closest surface point to a sphere center; nullopt when farther than `reach`
    std::optional<SurfaceHit> query(const Vec3& center, double reach) const;

    // height of the lowest surface point pierced by the vertical ray through (x, y);
    // supported for Cylinder and Mesh (the SCM wheel shapes)
    std::optional<double> lower_surface_z(double x, double y) const;

    // world AABB used for broad-phase culling
    void world_aabb(Vec3& lo, Vec3& hi) const;

    // factories
    static RigidImplement half_space(const Vec3& point, const Vec3& outward_normal, std::string name);
    static RigidImplement plate(double radius, const Vec3& center, std::string name);
    static RigidImplement annulus(double r_inner, double r_outer, double thickness, const Vec3& center,
                                  std::string name);
    static RigidImplement cylinder_wheel(double radius, double width, const Vec3& center, std::string name);
    static RigidImplement mesh_wheel(TriMesh mesh, const Vec3& center, std::string name);
};

}  // namespace terracal::dem
