#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "physlink/events.hpp"
#include "physlink/pcc.hpp"
#include "physlink/wire/bytes.hpp"

namespace physlink::wire {

// Message type registry. First byte of every application payload.
enum class MsgType : std::uint8_t {
    PccBatch = 0x01,
    Snapshot = 0x02,
    GroupedUpdate = 0x03,
    MoveToTransform = 0x04,
    CollisionEvt = 0x05,
    GrabStart = 0x06,
    GrabEnd = 0x07,
    Join = 0x08,
    JoinAck = 0x09,
    DestroyEntity = 0x0A,
    SoftbodyParticles = 0x0B,
};

inline constexpr std::size_t kDefaultMaxPayload = 1200;

// Change mask bits. Mask 0 means the update was suppressed entirely.
inline constexpr std::uint8_t kMaskPosition = 0x01;
inline constexpr std::uint8_t kMaskRotation = 0x02;

// Default significance thresholds for selective synchronization.
inline constexpr float kDefaultPosEps = 0.001f;            // 1 mm
inline constexpr float kDefaultRotEps = 0.00872664626f;    // 0.5 degrees

// One delta-compressed entity update.
//   entity_id u32 | owner u16 | mask u8 | position 3*f32 if mask&1 | rotation 4*f32 if mask&2
// Encoded length is 7/19/23/35 bytes depending on the mask.
struct TransformRecord {
    EntityId entity_id = kNoEntity;
    PlayerId owner = kWorldOwner;
    std::uint8_t mask = 0;
    Vec3 position{};
    Quat rotation = Quat::identity();

    std::size_t encoded_size() const {
        return 7 + ((mask & kMaskPosition) ? 12 : 0) + ((mask & kMaskRotation) ? 16 : 0);
    }
    bool operator==(const TransformRecord&) const = default;
};

// Compares two poses against the significance thresholds.
std::uint8_t diff_transform(const Transform& prev, const Transform& curr, float pos_eps, float rot_eps);

// Overwrites only the masked fields of `local`; unmasked fields are untouched.
Transform apply_record(const Transform& local, const TransformRecord& rec);

void encode_record(ByteWriter& w, const TransformRecord& rec);
TransformRecord decode_record(ByteReader& r);

// Grouped update framing: msg_type u8 | tick u32 | count u16 | records.
// Packs records in input order into the fewest messages whose total payload
// stays within max_payload. Returns no messages for an empty record list.
std::vector<std::vector<std::uint8_t>> encode_group(std::span<const TransformRecord> records,
                                                    std::uint32_t tick,
                                                    std::size_t max_payload = kDefaultMaxPayload);

struct GroupedUpdate {
    std::uint32_t tick = 0;
    std::vector<TransformRecord> records;
};
GroupedUpdate decode_group(std::span<const std::uint8_t> payload);

// PCC batch: msg_type u8 | count u16 | containers.
// Container field order: entity_id u32 | parent_id u32 | owner u16 | flags u8 |
// transform (pos 3*f32, rot 4*f32) | body? | collider? | springs?, with the
// optional sections gated by the flags byte.
std::vector<std::uint8_t> encode_pcc_batch(std::span<const Pcc> pccs);
std::vector<Pcc> decode_pcc_batch(std::span<const std::uint8_t> payload);

// Full-state snapshot sent reliably on join.
struct SnapshotEntity {
    EntityId entity_id = kNoEntity;
    PlayerId owner = kWorldOwner;
    std::uint8_t flags = 0; // bit0 interactable, bit1 kinematic
    Transform transform{};
    bool operator==(const SnapshotEntity&) const = default;
};
inline constexpr std::uint8_t kSnapInteractable = 0x01;
inline constexpr std::uint8_t kSnapKinematic = 0x02;

struct SoftbodySnapshot {
    EntityId entity_id = kNoEntity;
    std::vector<Vec3> particles;
    bool operator==(const SoftbodySnapshot&) const = default;
};

struct Snapshot {
    std::uint32_t tick = 0;
    std::vector<SnapshotEntity> entities;
    std::vector<SoftbodySnapshot> softbodies;
};
std::vector<std::uint8_t> encode_snapshot(const Snapshot& snap);
Snapshot decode_snapshot(std::span<const std::uint8_t> payload);

// Splits a snapshot into transport-sized messages: entities pack up to
// max_payload bytes each, softbodies ride one per message. Every chunk decodes
// as an ordinary snapshot; receivers merge them entity by entity.
std::vector<std::vector<std::uint8_t>> encode_snapshot_chunks(const Snapshot& snap,
                                                              std::size_t max_payload = kDefaultMaxPayload);

struct MoveToTransformMsg {
    PlayerId player = kWorldOwner;
    EntityId entity = kNoEntity;
    Transform target{};
};
std::vector<std::uint8_t> encode_move_to(const MoveToTransformMsg& m);
MoveToTransformMsg decode_move_to(std::span<const std::uint8_t> payload);

std::vector<std::uint8_t> encode_collision_event(const CollisionEvent& ev);
CollisionEvent decode_collision_event(std::span<const std::uint8_t> payload);

struct GrabMsg {
    PlayerId player = kWorldOwner;
    EntityId entity = kNoEntity;
};
std::vector<std::uint8_t> encode_grab(MsgType type, const GrabMsg& m); // GrabStart or GrabEnd
GrabMsg decode_grab(std::span<const std::uint8_t> payload);

std::vector<std::uint8_t> encode_join();

struct JoinAck {
    PlayerId player = kWorldOwner;
    EntityId head = kNoEntity;
    EntityId left_hand = kNoEntity;
    EntityId right_hand = kNoEntity;
};
std::vector<std::uint8_t> encode_join_ack(const JoinAck& a);
JoinAck decode_join_ack(std::span<const std::uint8_t> payload);

std::vector<std::uint8_t> encode_destroy(std::span<const EntityId> ids);
std::vector<EntityId> decode_destroy(std::span<const std::uint8_t> payload);

struct SoftbodyParticlesMsg {
    std::uint32_t tick = 0;
    EntityId entity = kNoEntity;
    std::vector<Vec3> particles;
};
std::vector<std::uint8_t> encode_softbody_particles(const SoftbodyParticlesMsg& m);
SoftbodyParticlesMsg decode_softbody_particles(std::span<const std::uint8_t> payload);

inline MsgType peek_type(std::span<const std::uint8_t> payload) {
    if (payload.empty()) throw WireError("empty payload");
    return static_cast<MsgType>(payload[0]);
}

} // namespace physlink::wire
