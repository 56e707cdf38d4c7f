#pragma once

#include <cmath>

namespace terracal {

// Minimal 3-vector. All physics state is SI doubles.
struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
    Vec3 normalized() const { double n = norm(); return {x / n, y / n, z / n}; }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Unit quaternion for implement orientation (w, x, y, z).
struct Rot {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    static Rot axis_angle(const Vec3& axis, double angle) {
        const Vec3 a = axis.normalized();
        const double h = 0.5 * angle, s = std::sin(h);
        return {std::cos(h), a.x * s, a.y * s, a.z * s};
    }

    Rot conj() const { return {w, -x, -y, -z}; }

    Vec3 rotate(const Vec3& v) const {
        // v' = v + 2 q_vec x (q_vec x v + w v)
        const Vec3 q{x, y, z};
        const Vec3 t = q.cross(v) * 2.0;
        return v + t * w + q.cross(t);
    }
    Vec3 rotate_back(const Vec3& v) const { return conj().rotate(v); }

    // dq/dt = 1/2 * omega (*) q, advanced explicitly then renormalized
    void integrate(const Vec3& omega, double dt) {
        const double hw = -0.5 * (omega.x * x + omega.y * y + omega.z * z);
        const double hx = 0.5 * (omega.x * w + omega.y * z - omega.z * y);
        const double hy = 0.5 * (omega.y * w + omega.z * x - omega.x * z);
        const double hz = 0.5 * (omega.z * w + omega.x * y - omega.y * x);
        w += hw * dt; x += hx * dt; y += hy * dt; z += hz * dt;
        const double n = std::sqrt(w * w + x * x + y * y + z * z);
        w /= n; x /= n; y /= n; z /= n;
    }
};

}  // namespace terracal
