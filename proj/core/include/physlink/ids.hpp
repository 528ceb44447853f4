#pragma once

#include <cstdint>

namespace physlink {

// Entity ids are session-unique and identical on server and every client.
// 0 is reserved for "none / no parent".
using EntityId = std::uint32_t;
inline constexpr EntityId kNoEntity = 0;

// Player 0 is the server / world owner.
using PlayerId = std::uint16_t;
inline constexpr PlayerId kWorldOwner = 0;

} // namespace physlink
