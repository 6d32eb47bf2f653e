#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace sitert {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 2.998e8;  // m/s
inline constexpr double kVacuumPermittivity = 8.854e-12;  // F/m

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double norm2(const Vec3& v) { return dot(v, v); }

inline Vec3 normalized(const Vec3& v) {
    double n = norm(v);
    if (n == 0.0)
        throw std::domain_error("cannot normalize zero vector");
    return v / n;
}

// Mirror direction d across a surface with unit normal n: r = d - 2(d.n)n.
inline Vec3 reflect_dir(const Vec3& d, const Vec3& n) {
    return d - 2.0 * dot(d, n) * n;
}

// Mirror a point across the plane n.p + offset = 0.
inline Vec3 mirror_point(const Vec3& p, const Vec3& n, double offset) {
    return p - 2.0 * (dot(n, p) + offset) * n;
}

struct Aabb {
    Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
            std::numeric_limits<double>::max()};
    Vec3 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
            std::numeric_limits<double>::lowest()};

    bool empty() const { return lo.x > hi.x; }

    void expand(const Vec3& p) {
        for (int i = 0; i < 3; ++i) {
            if (p[i] < lo[i]) lo[i] = p[i];
            if (p[i] > hi[i]) hi[i] = p[i];
        }
    }

    void expand(const Aabb& b) {
        if (b.empty()) return;
        expand(b.lo);
        expand(b.hi);
    }

    Vec3 center() const { return (lo + hi) * 0.5; }

    int longest_axis() const {
        Vec3 d = hi - lo;
        if (d.x >= d.y && d.x >= d.z) return 0;
        return d.y >= d.z ? 1 : 2;
    }

    // Slab test against a ray; true if [t_min, t_max] overlaps the box.
    bool hit(const Vec3& o, const Vec3& inv_dir, double t_min, double t_max) const {
        for (int i = 0; i < 3; ++i) {
            double t0 = (lo[i] - o[i]) * inv_dir[i];
            double t1 = (hi[i] - o[i]) * inv_dir[i];
            if (inv_dir[i] < 0.0) std::swap(t0, t1);
            t_min = t0 > t_min ? t0 : t_min;
            t_max = t1 < t_max ? t1 : t_max;
            if (t_max < t_min) return false;
        }
        return true;
    }
};

// Error categories drive CLI exit codes.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PhysicsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace sitert
