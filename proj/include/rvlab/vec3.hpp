#pragma once

#include <cmath>

namespace rvlab
{

    /// Cartesian 3-vector. Units depend on context (m, m/s, N).
    struct Vec3
    {
        double x{0.0};
        double y{0.0};
        double z{0.0};

        constexpr Vec3 &operator+=(const Vec3 &o)
        {
            x += o.x;
            y += o.y;
            z += o.z;
            return *this;
        }
        constexpr Vec3 &operator-=(const Vec3 &o)
        {
            x -= o.x;
            y -= o.y;
            z -= o.z;
            return *this;
        }
        constexpr Vec3 &operator*=(double s)
        {
            x *= s;
            y *= s;
            z *= s;
            return *this;
        }

        friend constexpr bool operator==(const Vec3 &, const Vec3 &) = default;
    };

    constexpr Vec3 operator+(Vec3 a, const Vec3 &b) { return a += b; }
    constexpr Vec3 operator-(Vec3 a, const Vec3 &b) { return a -= b; }
    constexpr Vec3 operator-(const Vec3 &a) { return {-a.x, -a.y, -a.z}; }
    constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    constexpr Vec3 operator/(const Vec3 &a, double s) { return {a.x / s, a.y / s, a.z / s}; }

    constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

    constexpr Vec3 cross(const Vec3 &a, const Vec3 &b)
    {
        return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
    }

    inline double norm(const Vec3 &a) { return std::sqrt(dot(a, a)); }

    /// Caller guarantees a non-zero input.
    inline Vec3 unit(const Vec3 &a) { return a / norm(a); }

    inline bool is_finite(const Vec3 &a) { return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z); }

} // namespace rvlab
