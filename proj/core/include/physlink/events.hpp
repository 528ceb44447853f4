#pragma once

#include <cstdint>
#include <utility>

#include "physlink/ids.hpp"

namespace physlink {

enum class ContactKind : std::uint8_t { Enter = 0, Exit = 1 };

// Contact begin/end between an entity pair. The pair is canonically ordered
// a < b so that (a,b) and (b,a) describe the same event.
struct CollisionEvent {
    ContactKind kind = ContactKind::Enter;
    EntityId a = kNoEntity;
    EntityId b = kNoEntity;
    std::uint32_t tick = 0;

    bool operator==(const CollisionEvent&) const = default;
};

inline CollisionEvent make_collision_event(ContactKind kind, EntityId a, EntityId b, std::uint32_t tick) {
    if (b < a) std::swap(a, b);
    return {kind, a, b, tick};
}

} // namespace physlink
