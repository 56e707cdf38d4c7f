#include "terracal/implement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace terracal::dem {

// ---------------------------------------------------------------------------
// TriMesh
// ---------------------------------------------------------------------------

TriMesh TriMesh::load_obj(const std::string& text) {
    TriMesh m;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z))
                throw std::runtime_error("mesh parse error at line " + std::to_string(lineno));
            m.vertices.push_back({x, y, z});
        } else if (tag == "f") {
            std::uint32_t idx[3];
            for (int k = 0; k < 3; ++k) {
                std::string tok;
                if (!(ls >> tok))
                    throw std::runtime_error("mesh parse error at line " + std::to_string(lineno));
                idx[k] = static_cast<std::uint32_t>(std::stoul(tok.substr(0, tok.find('/'))));
                if (idx[k] == 0 || idx[k] > m.vertices.size())
                    throw std::runtime_error("mesh face index out of range at line " + std::to_string(lineno));
                --idx[k];  // OBJ is 1-based
            }
            m.faces.push_back({idx[0], idx[1], idx[2]});
        }
        // other OBJ record types are ignored
    }
    m.validate();
    return m;
}

void TriMesh::validate() const {
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const Vec3& a = vertices[faces[f][0]];
        const Vec3& b = vertices[faces[f][1]];
        const Vec3& c = vertices[faces[f][2]];
        if ((b - a).cross(c - a).norm() <= 0.0)
            throw std::invalid_argument("mesh: degenerate triangle " + std::to_string(f));
    }
}

Vec3 TriMesh::face_normal(std::uint32_t f) const {
    const Vec3& a = vertices[faces[f][0]];
    const Vec3& b = vertices[faces[f][1]];
    const Vec3& c = vertices[faces[f][2]];
    return (b - a).cross(c - a).normalized();
}

// Ericson, Real-Time Collision Detection, 5.1.5
static Vec3 closest_point_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return b;
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return c;
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

// Moeller-Trumbore; returns t along dir for ray origin + t*dir
static std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                          const Vec3& b, const Vec3& c) {
    const Vec3 e1 = b - a, e2 = c - a;
    const Vec3 pv = dir.cross(e2);
    const double det = e1.dot(pv);
    if (std::abs(det) < 1e-14) return std::nullopt;
    const double inv = 1.0 / det;
    const Vec3 tv = origin - a;
    const double u = tv.dot(pv) * inv;
    if (u < -1e-12 || u > 1.0 + 1e-12) return std::nullopt;
    const Vec3 qv = tv.cross(e1);
    const double v = dir.dot(qv) * inv;
    if (v < -1e-12 || u + v > 1.0 + 1e-12) return std::nullopt;
    return e2.dot(qv) * inv;
}

// ---------------------------------------------------------------------------
// MeshGrid
// ---------------------------------------------------------------------------

MeshGrid::MeshGrid(const TriMesh& mesh, double cell) : cell_(cell) {
    if (mesh.faces.empty()) return;
    Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    for (const Vec3& v : mesh.vertices) {
        lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
        hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
    }
    origin_ = lo - Vec3{cell, cell, cell};
    nx_ = static_cast<int>((hi.x - origin_.x) / cell) + 2;
    ny_ = static_cast<int>((hi.y - origin_.y) / cell) + 2;
    nz_ = static_cast<int>((hi.z - origin_.z) / cell) + 2;
    cells_.resize(static_cast<std::size_t>(nx_) * ny_ * nz_);
    tri_aabbs_.resize(mesh.faces.size());
    for (std::uint32_t f = 0; f < mesh.faces.size(); ++f) {
        Vec3 tlo{1e300, 1e300, 1e300}, thi{-1e300, -1e300, -1e300};
        for (int k = 0; k < 3; ++k) {
            const Vec3& v = mesh.vertices[mesh.faces[f][k]];
            tlo = {std::min(tlo.x, v.x), std::min(tlo.y, v.y), std::min(tlo.z, v.z)};
            thi = {std::max(thi.x, v.x), std::max(thi.y, v.y), std::max(thi.z, v.z)};
        }
        tri_aabbs_[f] = {tlo, thi};
        const int ix0 = static_cast<int>((tlo.x - origin_.x) / cell), ix1 = static_cast<int>((thi.x - origin_.x) / cell);
        const int iy0 = static_cast<int>((tlo.y - origin_.y) / cell), iy1 = static_cast<int>((thi.y - origin_.y) / cell);
        const int iz0 = static_cast<int>((tlo.z - origin_.z) / cell), iz1 = static_cast<int>((thi.z - origin_.z) / cell);
        for (int iz = iz0; iz <= iz1; ++iz)
            for (int iy = iy0; iy <= iy1; ++iy)
                for (int ix = ix0; ix <= ix1; ++ix)
                    cells_[(static_cast<std::size_t>(iz) * ny_ + iy) * nx_ + ix].push_back(f);
    }
}

void MeshGrid::query(const Vec3& center, double rad, std::vector<std::uint32_t>& out) const {
    out.clear();
    if (cells_.empty()) return;
    auto clampi = [](int v, int hi) { return std::clamp(v, 0, hi - 1); };
    const int ix0 = clampi(static_cast<int>((center.x - rad - origin_.x) / cell_), nx_);
    const int ix1 = clampi(static_cast<int>((center.x + rad - origin_.x) / cell_), nx_);
    const int iy0 = clampi(static_cast<int>((center.y - rad - origin_.y) / cell_), ny_);
    const int iy1 = clampi(static_cast<int>((center.y + rad - origin_.y) / cell_), ny_);
    const int iz0 = clampi(static_cast<int>((center.z - rad - origin_.z) / cell_), nz_);
    const int iz1 = clampi(static_cast<int>((center.z + rad - origin_.z) / cell_), nz_);
    for (int iz = iz0; iz <= iz1; ++iz)
        for (int iy = iy0; iy <= iy1; ++iy)
            for (int ix = ix0; ix <= ix1; ++ix)
                for (std::uint32_t f : cells_[(static_cast<std::size_t>(iz) * ny_ + iy) * nx_ + ix])
                    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
    std::sort(out.begin(), out.end());
}

// ---------------------------------------------------------------------------
// RigidImplement
// ---------------------------------------------------------------------------

void RigidImplement::validate() const {
    switch (kind) {
        case ShapeKind::HalfSpace:
            break;
        case ShapeKind::Plate:
            if (r_outer <= 0) throw std::invalid_argument("plate: radius must be > 0");
            break;
        case ShapeKind::Ring:
            if (!(0 < r_inner && r_inner < r_outer))
                throw std::invalid_argument("annulus: need 0 < r_inner < r_outer");
            if (half_len <= 0) throw std::invalid_argument("annulus: thickness must be > 0");
            break;
        case ShapeKind::Cylinder:
            if (r_outer <= 0 || half_len <= 0)
                throw std::invalid_argument("cylinder: radius and width must be > 0");
            break;
        case ShapeKind::Mesh:
            mesh.validate();
            break;
    }
    if (free_axis && load_mass <= 0)
        throw std::invalid_argument("implement '" + name + "': free DOF requires load mass > 0");
}

// closest point in the (rho, s) cross-section rectangle [r0,r1] x [-h,h];
// returns penetration-signed distance and the 2D closest point + outward 2D normal
static void rect_closest(double rho, double s, double r0, double r1, double h, double& dist,
                         double& crho, double& cs, double& nrho, double& ns) {
    const bool inside = rho >= r0 && rho <= r1 && s >= -h && s <= h;
    if (!inside) {
        crho = std::clamp(rho, r0, r1);
        cs = std::clamp(s, -h, h);
        const double drho = rho - crho, ds = s - cs;
        dist = std::sqrt(drho * drho + ds * ds);
        if (dist > 0) { nrho = drho / dist; ns = ds / dist; }
        else { nrho = 0; ns = 1; }
        return;
    }
    // inside: push out through the nearest face
    const double d_in = rho - r0, d_out = r1 - rho, d_bot = s + h, d_top = h - s;
    double best = d_out;
    crho = r1; cs = s; nrho = 1; ns = 0;
    if (r0 > 0 && d_in < best) { best = d_in; crho = r0; cs = s; nrho = -1; ns = 0; }
    if (d_top < best) { best = d_top; crho = rho; cs = h; nrho = 0; ns = 1; }
    if (d_bot < best) { best = d_bot; crho = rho; cs = -h; nrho = 0; ns = -1; }
    dist = -best;
}

std::optional<SurfaceHit> RigidImplement::query(const Vec3& center, double reach) const {
    SurfaceHit hit;
    switch (kind) {
        case ShapeKind::HalfSpace: {
            const Vec3 n = world_axis();
            const double d = n.dot(center - pos);
            if (d > reach) return std::nullopt;
            hit.distance = d;
            hit.normal = n;
            hit.point = center - n * d;
            return hit;
        }
        case ShapeKind::Plate: {
            const Vec3 n = world_axis();
            const Vec3 d = center - pos;
            const double s = n.dot(d);
            const Vec3 radial = d - n * s;
            const double rho = radial.norm();
            Vec3 cp = pos;
            if (rho > 0) cp += radial * (std::min(rho, r_outer) / rho);
            const Vec3 delta = center - cp;
            const double dist = delta.norm();
            if (dist > reach) return std::nullopt;
            if (dist <= 1e-300) return std::nullopt;  // center exactly on the plate: degenerate
            hit.distance = dist;
            hit.normal = delta / dist;
            hit.point = cp;
            return hit;
        }
        case ShapeKind::Ring:
        case ShapeKind::Cylinder: {
            const Vec3 a = world_axis();
            const Vec3 d = center - pos;
            const double s = a.dot(d);
            const Vec3 radial = d - a * s;
            const double rho = radial.norm();
            // quick reject
            if (std::abs(s) - half_len > reach || rho - r_outer > reach) return std::nullopt;
            Vec3 rhat;
            if (rho > 1e-12) rhat = radial / rho;
            else {
                // on-axis: any perpendicular direction; pick deterministically
                rhat = std::abs(a.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
                rhat = (rhat - a * a.dot(rhat)).normalized();
            }
            const double r0 = (kind == ShapeKind::Ring) ? r_inner : 0.0;
            double dist, crho, cs, nrho, ns;
            rect_closest(rho, s, r0, r_outer, half_len, dist, crho, cs, nrho, ns);
            if (dist > reach) return std::nullopt;
            hit.distance = dist;
            hit.point = pos + rhat * crho + a * cs;
            hit.normal = (rhat * nrho + a * ns).normalized();
            return hit;
        }
        case ShapeKind::Mesh: {
            const Vec3 local = orient.rotate_back(center - pos);
            static thread_local std::vector<std::uint32_t> cand;
            mesh_grid.query(local, reach, cand);
            double best = std::numeric_limits<double>::max();
            std::uint32_t best_f = 0;
            Vec3 best_p;
            for (std::uint32_t f : cand) {
                const Vec3 cp = closest_point_triangle(local, mesh.vertices[mesh.faces[f][0]],
                                                       mesh.vertices[mesh.faces[f][1]],
                                                       mesh.vertices[mesh.faces[f][2]]);
                const double d2 = (local - cp).norm2();
                if (d2 < best) { best = d2; best_f = f; best_p = cp; }
            }
            if (best == std::numeric_limits<double>::max()) return std::nullopt;
            const double dist = std::sqrt(best);
            if (dist > reach) return std::nullopt;
            Vec3 n_local = dist > 1e-12 ? (local - best_p) / dist : mesh.face_normal(best_f);
            hit.distance = dist;
            hit.normal = orient.rotate(n_local);
            hit.point = orient.rotate(best_p) + pos;
            hit.feature = best_f;
            return hit;
        }
    }
    return std::nullopt;
}

std::optional<double> RigidImplement::lower_surface_z(double x, double y) const {
    if (kind == ShapeKind::Cylinder) {
        const Vec3 a = world_axis();
        const Vec3 d0 = Vec3{x, y, 0.0} - pos;
        const double s0 = a.dot(d0), sz = a.z;
        const Vec3 q0 = d0 - a * s0;
        const Vec3 qz = Vec3{0, 0, 1} - a * sz;
        // |q0 + t qz|^2 = R^2
        const double A = qz.norm2(), B = 2.0 * q0.dot(qz), C = q0.norm2() - r_outer * r_outer;
        if (A < 1e-16) return std::nullopt;  // axis vertical: no lower surface
        const double disc = B * B - 4 * A * C;
        if (disc < 0) return std::nullopt;
        const double t = (-B - std::sqrt(disc)) / (2 * A);
        if (std::abs(s0 + sz * t) > half_len) return std::nullopt;
        return t;
    }
    if (kind == ShapeKind::Mesh) {
        // vertical ray cast from far below, in the mesh local frame
        const Vec3 origin = orient.rotate_back(Vec3{x, y, 0.0} - pos);
        const Vec3 dir = orient.rotate_back(Vec3{0, 0, 1});
        double best = std::numeric_limits<double>::max();
        for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
            auto t = ray_triangle(origin, dir, mesh.vertices[mesh.faces[f][0]],
                                  mesh.vertices[mesh.faces[f][1]], mesh.vertices[mesh.faces[f][2]]);
            if (t && *t < best) best = *t;
        }
        if (best == std::numeric_limits<double>::max()) return std::nullopt;
        return best;  // dir has unit world-z component, so t is the world height
    }
    return std::nullopt;
}

void RigidImplement::world_aabb(Vec3& lo, Vec3& hi) const {
    const double big = 1e30;
    switch (kind) {
        case ShapeKind::HalfSpace:
            lo = {-big, -big, -big};
            hi = {big, big, big};
            return;
        case ShapeKind::Plate:
        case ShapeKind::Ring:
        case ShapeKind::Cylinder: {
            // exact extent of a disc/cylinder along each world axis
            const Vec3 a = world_axis();
            const double ax[3] = {a.x, a.y, a.z};
            double ext[3];
            for (int k = 0; k < 3; ++k) {
                const double c = std::clamp(std::abs(ax[k]), 0.0, 1.0);
                ext[k] = half_len * c + r_outer * std::sqrt(1.0 - c * c);
            }
            lo = pos - Vec3{ext[0], ext[1], ext[2]};
            hi = pos + Vec3{ext[0], ext[1], ext[2]};
            return;
        }
        case ShapeKind::Mesh: {
            lo = {big, big, big};
            hi = {-big, -big, -big};
            for (const Vec3& vl : mesh.vertices) {
                const Vec3 v = orient.rotate(vl) + pos;
                lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
                hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
            }
            return;
        }
    }
}

RigidImplement RigidImplement::half_space(const Vec3& point, const Vec3& outward_normal, std::string name) {
    RigidImplement impl;
    impl.kind = ShapeKind::HalfSpace;
    impl.pos = point;
    impl.axis = outward_normal.normalized();
    impl.name = std::move(name);
    return impl;
}

RigidImplement RigidImplement::plate(double radius, const Vec3& center, std::string name) {
    RigidImplement impl;
    impl.kind = ShapeKind::Plate;
    impl.r_outer = radius;
    impl.pos = center;
    impl.name = std::move(name);
    impl.validate();
    return impl;
}

RigidImplement RigidImplement::annulus(double r_inner, double r_outer, double thickness, const Vec3& center,
                                       std::string name) {
    RigidImplement impl;
    impl.kind = ShapeKind::Ring;
    impl.r_inner = r_inner;
    impl.r_outer = r_outer;
    impl.half_len = 0.5 * thickness;
    impl.pos = center;
    impl.name = std::move(name);
    impl.validate();
    return impl;
}

RigidImplement RigidImplement::cylinder_wheel(double radius, double width, const Vec3& center,
                                              std::string name) {
    RigidImplement impl;
    impl.kind = ShapeKind::Cylinder;
    impl.r_outer = radius;
    impl.half_len = 0.5 * width;
    impl.axis = {0, 1, 0};  // axle along y; rolls in +x with z up
    impl.pos = center;
    impl.name = std::move(name);
    impl.validate();
    return impl;
}

RigidImplement RigidImplement::mesh_wheel(TriMesh mesh, const Vec3& center, std::string name) {
    RigidImplement impl;
    impl.kind = ShapeKind::Mesh;
    impl.mesh = std::move(mesh);
    impl.mesh.validate();
    // cell sized to the median triangle edge keeps the grid balanced for wheel meshes
    double edge_sum = 0.0;
    for (const auto& f : impl.mesh.faces)
        edge_sum += (impl.mesh.vertices[f[1]] - impl.mesh.vertices[f[0]]).norm();
    const double cell = impl.mesh.faces.empty() ? 0.01 : std::max(1e-3, edge_sum / impl.mesh.faces.size());
    impl.mesh_grid = MeshGrid(impl.mesh, cell);
    impl.pos = center;
    impl.name = std::move(name);
    return impl;
}

}  // namespace terracal::dem
