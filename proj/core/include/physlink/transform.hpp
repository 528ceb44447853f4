#pragma once

#include "physlink/math.hpp"

namespace physlink {

// Rigid pose: position in meters, unit rotation quaternion.
struct Transform {
    Vec3 position{};
    Quat rotation = Quat::identity();

    constexpr bool operator==(const Transform& o) const = default;
};

// parent ∘ local: apply local in the parent's frame.
inline Transform compose(const Transform& parent, const Transform& local) {
    return {
        parent.position + rotate(parent.rotation, local.position),
        normalized(parent.rotation * local.rotation),
    };
}

// Inverse pose, compose(t, inverse_of(t)) == identity.
inline Transform inverse_of(const Transform& t) {
    const Quat inv = conjugate(t.rotation);
    return {rotate(inv, -t.position), inv};
}

// b expressed in a's frame: compose(a, relative(a, b)) == b.
inline Transform relative(const Transform& a, const Transform& b) {
    return compose(inverse_of(a), b);
}

inline bool finite(const Transform& t) { return finite(t.position) && finite(t.rotation); }

} // namespace physlink
