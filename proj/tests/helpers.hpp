#pragma once

#include <cmath>
#include <random>

#include "physlink/transform.hpp"
#include "physlink/wire/messages.hpp"

namespace testutil {

using physlink::Quat;
using physlink::Transform;
using physlink::Vec3;

inline Vec3 random_vec3(std::mt19937& rng, float lo = -10.0f, float hi = 10.0f) {
    std::uniform_real_distribution<float> d(lo, hi);
    return {d(rng), d(rng), d(rng)};
}

inline Quat random_rotation(std::mt19937& rng) {
    std::uniform_real_distribution<float> d(-1.0f, 1.0f);
    Quat q{d(rng), d(rng), d(rng), d(rng)};
    if (physlink::norm(q) < 1e-3f) q = Quat::identity();
    return physlink::normalized(q);
}

inline Transform random_transform(std::mt19937& rng) {
    return {random_vec3(rng), random_rotation(rng)};
}

inline bool approx_vec(const Vec3& a, const Vec3& b, float tol) {
    return std::fabs(a.x - b.x) <= tol && std::fabs(a.y - b.y) <= tol && std::fabs(a.z - b.z) <= tol;
}

// Same rotation regardless of quaternion sign.
inline bool approx_rot(const Quat& a, const Quat& b, float tol) {
    return physlink::angle_between(a, b) <= tol;
}

inline bool approx_transform(const Transform& a, const Transform& b, float pos_tol, float rot_tol) {
    return approx_vec(a.position, b.position, pos_tol) && approx_rot(a.rotation, b.rotation, rot_tol);
}

inline bool approx_transform(const Transform& a, const Transform& b, float tol) {
    return approx_transform(a, b, tol, tol);
}

// Unmasked fields stay at their defaults so encode/decode round-trips compare equal.
inline physlink::wire::TransformRecord random_record(std::mt19937& rng) {
    std::uniform_int_distribution<int> mask(0, 3);
    std::uniform_int_distribution<std::uint32_t> id(1, 1u << 20);
    std::uniform_int_distribution<int> owner(0, 64);
    physlink::wire::TransformRecord r;
    r.entity_id = id(rng);
    r.owner = static_cast<physlink::PlayerId>(owner(rng));
    r.mask = static_cast<std::uint8_t>(mask(rng));
    if (r.mask & physlink::wire::kMaskPosition) r.position = random_vec3(rng);
    if (r.mask & physlink::wire::kMaskRotation) r.rotation = random_rotation(rng);
    return r;
}

} // namespace testutil
