#pragma once

#include <cassert>

#include "physlink/transform.hpp"

namespace physlink {

// Unit dual quaternion encoding a rigid motion: |real| = 1, dot(real, dual) = 0.
// Used to smooth object motion between interval-based network updates.
struct DualQuaternion {
    Quat real = Quat::identity();
    Quat dual{0, 0, 0, 0};

    static DualQuaternion from_transform(const Transform& t) {
        DualQuaternion dq;
        dq.real = normalized(t.rotation);
        const Quat tq{t.position.x, t.position.y, t.position.z, 0.0f};
        dq.dual = (tq * dq.real) * 0.5f;
        return dq;
    }

    Transform to_transform() const {
        assert(norm(real) > 1e-6f);
        const Quat t = (dual * 2.0f) * conjugate(real);
        return {{t.x, t.y, t.z}, real};
    }

    bool satisfies_invariants(float tol = 1e-5f) const {
        return std::fabs(norm(real) - 1.0f) <= tol && std::fabs(dot(real, dual)) <= tol;
    }
};

// Normalized linear blending with shortest-path sign fix. t in [0,1].
inline DualQuaternion blend(const DualQuaternion& a, const DualQuaternion& bin, float t) {
    DualQuaternion b = bin;
    if (dot(a.real, b.real) < 0.0f) {
        b.real = -b.real;
        b.dual = -b.dual;
    }
    Quat real = a.real + (b.real - a.real) * t;
    Quat dual = a.dual + (b.dual - a.dual) * t;
    const float n = norm(real);
    assert(n > 1e-6f);
    const float inv = 1.0f / n;
    real = real * inv;
    dual = dual * inv;
    // Project out any drift from the unit-dual-quaternion constraint surface.
    dual = dual - real * dot(real, dual);
    return {real, dual};
}

} // namespace physlink
