#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "physlink/ids.hpp"
#include "physlink/transform.hpp"

namespace physlink {

struct SphereShape {
    float radius = 0.5f;
    constexpr bool operator==(const SphereShape&) const = default;
};

// Axis-aligned box; these boxes do not rotate dynamically.
struct BoxShape {
    Vec3 half_extents{0.5f, 0.5f, 0.5f};
    constexpr bool operator==(const BoxShape&) const = default;
};

using Shape = std::variant<SphereShape, BoxShape>;

struct BodySpec {
    float mass = 1.0f;           // kg; ignored by the solver for kinematic bodies
    bool kinematic = false;
    float linear_damping = 0.0f; // 1/s
    float restitution = 0.0f;    // [0,1]
    bool operator==(const BodySpec&) const = default;
};

struct ColliderSpec {
    Shape shape = SphereShape{};
    bool trigger = false; // trigger colliders report contacts but produce no impulses
    bool operator==(const ColliderSpec&) const = default;
};

struct SpringSpec {
    EntityId other = kNoEntity;
    float rest_length = 1.0f; // m
    float stiffness = 100.0f; // N/m
    float damping = 0.0f;     // N·s/m
    bool operator==(const SpringSpec&) const = default;
};

// The serialized physics payload extracted from an entity on the client and
// re-instantiated on the server. transform_only containers are hierarchy
// placeholders for parents that carry no physics of their own.
struct Pcc {
    EntityId entity_id = kNoEntity;
    EntityId parent_id = kNoEntity; // kNoEntity = root
    PlayerId owner = kWorldOwner;
    Transform transform{};
    bool transform_only = false;
    bool interactable = false;
    std::optional<BodySpec> body;
    std::optional<ColliderSpec> collider;
    std::vector<SpringSpec> springs;

    bool operator==(const Pcc&) const = default;
};

// Returns one entry per violated invariant; empty means ok.
std::vector<std::string> validate_pcc(const Pcc& pcc);

} // namespace physlink
