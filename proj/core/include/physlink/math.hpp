#pragma once

#include <cmath>
#include <cstdint>

namespace physlink {

struct Vec3 {
    float x = 0.0f;
    float y = 0.0f;
    float z = 0.0f;

    constexpr Vec3() = default;
    constexpr Vec3(float px, float py, float pz) : x(px), y(py), z(pz) {}

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(float s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(float s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(float s) { x *= s; y *= s; z *= s; return *this; }
    constexpr bool operator==(const Vec3& o) const = default;
};

inline constexpr Vec3 operator*(float s, const Vec3& v) { return v * s; }

inline constexpr float dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline float length_sq(const Vec3& v) { return dot(v, v); }
inline float length(const Vec3& v) { return std::sqrt(length_sq(v)); }

inline Vec3 normalized(const Vec3& v) {
    const float len = length(v);
    return len > 0.0f ? v / len : Vec3{};
}

inline Vec3 lerp(const Vec3& a, const Vec3& b, float t) { return a + (b - a) * t; }

// Clamp |v| to max_len, preserving direction.
inline Vec3 clamp_length(const Vec3& v, float max_len) {
    const float l2 = length_sq(v);
    if (l2 <= max_len * max_len) return v;
    return v * (max_len / std::sqrt(l2));
}

inline bool finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Quaternion, (x,y,z,w) component order, w the scalar part.
struct Quat {
    float x = 0.0f;
    float y = 0.0f;
    float z = 0.0f;
    float w = 1.0f;

    constexpr Quat() = default;
    constexpr Quat(float qx, float qy, float qz, float qw) : x(qx), y(qy), z(qz), w(qw) {}

    static constexpr Quat identity() { return {0, 0, 0, 1}; }

    // Axis must be unit length; angle in radians.
    static Quat from_axis_angle(const Vec3& axis, float angle) {
        const float h = 0.5f * angle;
        const float s = std::sin(h);
        return {axis.x * s, axis.y * s, axis.z * s, std::cos(h)};
    }

    constexpr Quat operator+(const Quat& o) const { return {x + o.x, y + o.y, z + o.z, w + o.w}; }
    constexpr Quat operator-(const Quat& o) const { return {x - o.x, y - o.y, z - o.z, w - o.w}; }
    constexpr Quat operator*(float s) const { return {x * s, y * s, z * s, w * s}; }
    constexpr Quat operator-() const { return {-x, -y, -z, -w}; }
    constexpr bool operator==(const Quat& o) const = default;
};

// Hamilton product.
inline constexpr Quat operator*(const Quat& a, const Quat& b) {
    return {
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
    };
}

inline constexpr float dot(const Quat& a, const Quat& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z + a.w * b.w;
}
inline float norm(const Quat& q) { return std::sqrt(dot(q, q)); }
inline constexpr Quat conjugate(const Quat& q) { return {-q.x, -q.y, -q.z, q.w}; }

inline Quat normalized(const Quat& q) {
    const float n = norm(q);
    if (n <= 0.0f) return Quat::identity();
    const float inv = 1.0f / n;
    return {q.x * inv, q.y * inv, q.z * inv, q.w * inv};
}

// Rotate a vector: q v q*.
inline Vec3 rotate(const Quat& q, const Vec3& v) {
    const Vec3 u{q.x, q.y, q.z};
    const Vec3 t = cross(u, v) * 2.0f;
    return v + t * q.w + cross(u, t);
}

// Angle of the relative rotation between two unit quaternions, radians in
// [0, pi]. Uses the relative quaternion's vector part; acos of the dot loses
// half the float precision near zero angle.
inline float angle_between(const Quat& a, const Quat& b) {
    const Quat r = conjugate(a) * b;
    const float s = std::sqrt(r.x * r.x + r.y * r.y + r.z * r.z);
    return 2.0f * std::atan2(s, std::fabs(r.w));
}

// Shortest-path spherical interpolation; falls back to nlerp for tiny angles.
inline Quat slerp(const Quat& a, const Quat& bin, float t) {
    Quat b = bin;
    float cos_half = dot(a, b);
    if (cos_half < 0.0f) {
        b = -b;
        cos_half = -cos_half;
    }
    if (cos_half > 0.9995f) {
        return normalized(a + (b - a) * t);
    }
    const float half = std::acos(cos_half);
    const float s = std::sin(half);
    const float wa = std::sin((1.0f - t) * half) / s;
    const float wb = std::sin(t * half) / s;
    return normalized(a * wa + b * wb);
}

inline bool finite(const Quat& q) {
    return std::isfinite(q.x) && std::isfinite(q.y) && std::isfinite(q.z) && std::isfinite(q.w);
}

} // namespace physlink
