#include "physlink/wire/messages.hpp"

#include <cmath>
#include <string>

namespace physlink::wire {

namespace {

void expect_type(ByteReader& r, MsgType want, const char* what) {
    const auto got = static_cast<MsgType>(r.u8());
    if (got != want) throw WireError(std::string("unexpected message type for ") + what);
}

void put_transform(ByteWriter& w, const Transform& t) {
    w.vec3(t.position);
    w.quat(t.rotation);
}

Transform get_transform(ByteReader& r) {
    Transform t;
    t.position = r.vec3();
    t.rotation = r.quat();
    return t;
}

} // namespace

std::uint8_t diff_transform(const Transform& prev, const Transform& curr, float pos_eps, float rot_eps) {
    std::uint8_t mask = 0;
    if (length(curr.position - prev.position) > pos_eps) mask |= kMaskPosition;
    if (angle_between(prev.rotation, curr.rotation) > rot_eps) mask |= kMaskRotation;
    return mask;
}

Transform apply_record(const Transform& local, const TransformRecord& rec) {
    Transform out = local;
    if (rec.mask & kMaskPosition) out.position = rec.position;
    if (rec.mask & kMaskRotation) out.rotation = rec.rotation;
    return out;
}

void encode_record(ByteWriter& w, const TransformRecord& rec) {
    w.u32(rec.entity_id);
    w.u16(rec.owner);
    w.u8(rec.mask);
    if (rec.mask & kMaskPosition) w.vec3(rec.position);
    if (rec.mask & kMaskRotation) w.quat(rec.rotation);
}

TransformRecord decode_record(ByteReader& r) {
    TransformRecord rec;
    rec.entity_id = r.u32();
    rec.owner = r.u16();
    rec.mask = r.u8();
    if (rec.mask & ~(kMaskPosition | kMaskRotation)) throw WireError("unknown change mask bits");
    if (rec.mask & kMaskPosition) rec.position = r.vec3();
    if (rec.mask & kMaskRotation) rec.rotation = r.quat();
    return rec;
}

std::vector<std::vector<std::uint8_t>> encode_group(std::span<const TransformRecord> records,
                                                    std::uint32_t tick,
                                                    std::size_t max_payload) {
    constexpr std::size_t kHeader = 1 + 4 + 2;
    if (max_payload < kHeader + 7) throw WireError("max_payload too small for any record");

    std::vector<std::vector<std::uint8_t>> out;
    std::size_t i = 0;
    while (i < records.size()) {
        ByteWriter w;
        w.u8(static_cast<std::uint8_t>(MsgType::GroupedUpdate));
        w.u32(tick);
        const std::size_t count_at = w.size();
        w.u16(0);
        std::uint16_t count = 0;
        std::size_t used = kHeader;
        while (i < records.size()) {
            const std::size_t need = records[i].encoded_size();
            if (kHeader + need > max_payload) throw WireError("record exceeds max_payload");
            if (used + need > max_payload || count == 0xFFFF) break;
            encode_record(w, records[i]);
            used += need;
            ++count;
            ++i;
        }
        w.patch_u16(count_at, count);
        out.push_back(std::move(w).take());
    }
    return out;
}

GroupedUpdate decode_group(std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    expect_type(r, MsgType::GroupedUpdate, "grouped update");
    GroupedUpdate g;
    g.tick = r.u32();
    const std::uint16_t count = r.u16();
    g.records.reserve(count);
    for (std::uint16_t k = 0; k < count; ++k) g.records.push_back(decode_record(r));
    if (!r.done()) throw WireError("trailing bytes after grouped update");
    return g;
}

namespace {

constexpr std::uint8_t kPccTransformOnly = 0x01;
constexpr std::uint8_t kPccHasBody = 0x02;
constexpr std::uint8_t kPccHasCollider = 0x04;
constexpr std::uint8_t kPccHasSprings = 0x08;
constexpr std::uint8_t kPccInteractable = 0x10;

constexpr std::uint8_t kShapeSphere = 0;
constexpr std::uint8_t kShapeBox = 1;

void put_collider(ByteWriter& w, const ColliderSpec& c) {
    if (const auto* s = std::get_if<SphereShape>(&c.shape)) {
        w.u8(kShapeSphere);
        w.f32(s->radius);
    } else {
        const auto& b = std::get<BoxShape>(c.shape);
        w.u8(kShapeBox);
        w.vec3(b.half_extents);
    }
    w.u8(c.trigger ? 1 : 0);
}

ColliderSpec get_collider(ByteReader& r) {
    ColliderSpec c;
    const std::uint8_t kind = r.u8();
    if (kind == kShapeSphere) {
        c.shape = SphereShape{r.f32()};
    } else if (kind == kShapeBox) {
        c.shape = BoxShape{r.vec3()};
    } else {
        throw WireError("unknown collider shape");
    }
    c.trigger = r.u8() != 0;
    return c;
}

} // namespace

std::vector<std::uint8_t> encode_pcc_batch(std::span<const Pcc> pccs) {
    if (pccs.size() > 0xFFFF) throw WireError("too many containers for one batch");
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(MsgType::PccBatch));
    w.u16(static_cast<std::uint16_t>(pccs.size()));
    for (const Pcc& p : pccs) {
        w.u32(p.entity_id);
        w.u32(p.parent_id);
        w.u16(p.owner);
        std::uint8_t flags = 0;
        if (p.transform_only) flags |= kPccTransformOnly;
        if (p.body) flags |= kPccHasBody;
        if (p.collider) flags |= kPccHasCollider;
        if (!p.springs.empty()) flags |= kPccHasSprings;
        if (p.interactable) flags |= kPccInteractable;
        w.u8(flags);
        put_transform(w, p.transform);
        if (p.body) {
            w.f32(p.body->mass);
            w.u8(p.body->kinematic ? 1 : 0);
            w.f32(p.body->linear_damping);
            w.f32(p.body->restitution);
        }
        if (p.collider) put_collider(w, *p.collider);
        if (!p.springs.empty()) {
            if (p.springs.size() > 0xFF) throw WireError("too many springs on one container");
            w.u8(static_cast<std::uint8_t>(p.springs.size()));
            for (const SpringSpec& s : p.springs) {
                w.u32(s.other);
                w.f32(s.rest_length);
                w.f32(s.stiffness);
                w.f32(s.damping);
            }
        }
    }
    return std::move(w).take();
}

std::vector<Pcc> decode_pcc_batch(std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    expect_type(r, MsgType::PccBatch, "container batch");
    const std::uint16_t count = r.u16();
    std::vector<Pcc> out;
    out.reserve(count);
    for (std::uint16_t k = 0; k < count; ++k) {
        try {
            Pcc p;
            p.entity_id = r.u32();
            p.parent_id = r.u32();
            p.owner = r.u16();
            const std::uint8_t flags = r.u8();
            p.transform_only = (flags & kPccTransformOnly) != 0;
            p.interactable = (flags & kPccInteractable) != 0;
            p.transform = get_transform(r);
            if (flags & kPccHasBody) {
                BodySpec b;
                b.mass = r.f32();
                b.kinematic = r.u8() != 0;
                b.linear_damping = r.f32();
                b.restitution = r.f32();
                p.body = b;
            }
            if (flags & kPccHasCollider) p.collider = get_collider(r);
            if (flags & kPccHasSprings) {
                const std::uint8_t n = r.u8();
                p.springs.reserve(n);
                for (std::uint8_t s = 0; s < n; ++s) {
                    SpringSpec sp;
                    sp.other = r.u32();
                    sp.rest_length = r.f32();
                    sp.stiffness = r.f32();
                    sp.damping = r.f32();
                    p.springs.push_back(sp);
                }
            }
            out.push_back(std::move(p));
        } catch (const WireError&) {
            throw WireError("truncated container record " + std::to_string(k));
        }
    }
    if (!r.done()) throw WireError("trailing bytes after container batch");
    return out;
}

std::vector<std::uint8_t> encode_snapshot(const Snapshot& snap) {
    if (snap.entities.size() > 0xFFFF) throw WireError("too many entities for one snapshot");
    if (snap.softbodies.size() > 0xFFFF) throw WireError("too many softbodies for one snapshot");
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(MsgType::Snapshot));
    w.u32(snap.tick);
    w.u16(static_cast<std::uint16_t>(snap.entities.size()));
    for (const SnapshotEntity& e : snap.entities) {
        w.u32(e.entity_id);
        w.u16(e.owner);
        w.u8(e.flags);
        put_transform(w, e.transform);
    }
    w.u16(static_cast<std::uint16_t>(snap.softbodies.size()));
    for (const SoftbodySnapshot& s : snap.softbodies) {
        if (s.particles.size() > 0xFFFF) throw WireError("too many particles for one softbody");
        w.u32(s.entity_id);
        w.u16(static_cast<std::uint16_t>(s.particles.size()));
        for (const Vec3& p : s.particles) w.vec3(p);
    }
    return std::move(w).take();
}

Snapshot decode_snapshot(std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    expect_type(r, MsgType::Snapshot, "snapshot");
    Snapshot snap;
    snap.tick = r.u32();
    const std::uint16_t ne = r.u16();
    snap.entities.reserve(ne);
    for (std::uint16_t k = 0; k < ne; ++k) {
        SnapshotEntity e;
        e.entity_id = r.u32();
        e.owner = r.u16();
        e.flags = r.u8();
        e.transform = get_transform(r);
        snap.entities.push_back(e);
    }
    const std::uint16_t ns = r.u16();
    snap.softbodies.reserve(ns);
    for (std::uint16_t k = 0; k < ns; ++k) {
        SoftbodySnapshot s;
        s.entity_id = r.u32();
        const std::uint16_t np = r.u16();
        s.particles.reserve(np);
        for (std::uint16_t p = 0; p < np; ++p) s.particles.push_back(r.vec3());
        snap.softbodies.push_back(std::move(s));
    }
    if (!r.done()) throw WireError("trailing bytes after snapshot");
    return snap;
}

std::vector<std::vector<std::uint8_t>> encode_snapshot_chunks(const Snapshot& snap, std::size_t max_payload) {
    constexpr std::size_t kEntityBytes = 35; // id + owner + flags + transform
    constexpr std::size_t kOverhead = 9;     // type + tick + both counts
    if (max_payload < kOverhead + kEntityBytes) throw WireError("max_payload too small for a snapshot entity");
    const std::size_t per_chunk = (max_payload - kOverhead) / kEntityBytes;

    std::vector<std::vector<std::uint8_t>> out;
    for (std::size_t at = 0; at < snap.entities.size(); at += per_chunk) {
        Snapshot chunk;
        chunk.tick = snap.tick;
        const std::size_t end = std::min(at + per_chunk, snap.entities.size());
        chunk.entities.assign(snap.entities.begin() + at, snap.entities.begin() + end);
        out.push_back(encode_snapshot(chunk));
    }
    for (const SoftbodySnapshot& s : snap.softbodies) {
        Snapshot chunk;
        chunk.tick = snap.tick;
        chunk.softbodies.push_back(s);
        out.push_back(encode_snapshot(chunk));
    }
    if (out.empty()) {
        Snapshot empty;
        empty.tick = snap.tick;
        out.push_back(encode_snapshot(empty));
    }
    return out;
}

std::vector<std::uint8_t> encode_move_to(const MoveToTransformMsg& m) {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(MsgType::MoveToTransform));
    w.u16(m.player);
    w.u32(m.entity);
    put_transform(w, m.target);
    return std::move(w).take();
}

MoveToTransformMsg decode_move_to(std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    expect_type(r, MsgType::MoveToTransform, "move command");
    MoveToTransformMsg m;
    m.player = r.u16();
    m.entity = r.u32();
    m.target = get_transform(r);
    if (!r.done()) throw WireError("trailing bytes after move command");
    return m;
}

std::vector<std::uint8_t> encode_collision_event(const CollisionEvent& ev) {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(MsgType::CollisionEvt));
    w.u8(ev.kind == ContactKind::Enter ? 0 : 1);
    w.u32(ev.a);
    w.u32(ev.b);
    w.u32(ev.tick);
    return std::move(w).take();
}

CollisionEvent decode_collision_event(std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    expect_type(r, MsgType::CollisionEvt, "collision event");
    CollisionEvent ev;
    const std::uint8_t kind = r.u8();
    if (kind > 1) throw WireError("unknown contact kind");
    ev.kind = kind == 0 ? ContactKind::Enter : ContactKind::Exit;
    ev.a = r.u32();
    ev.b = r.u32();
    ev.tick = r.u32();
    if (!r.done()) throw WireError("trailing bytes after collision event");
    return ev;
}

std::vector<std::uint8_t> encode_grab(MsgType type, const GrabMsg& m) {
    if (type != MsgType::GrabStart && type != MsgType::GrabEnd) throw WireError("not a grab message type");
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(type));
    w.u16(m.player);
    w.u32(m.entity);
    return std::move(w).take();
}

GrabMsg decode_grab(std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    const auto type = static_cast<MsgType>(r.u8());
    if (type != MsgType::GrabStart && type != MsgType::GrabEnd) throw WireError("not a grab message");
    GrabMsg m;
    m.player = r.u16();
    m.entity = r.u32();
    if (!r.done()) throw WireError("trailing bytes after grab message");
    return m;
}

std::vector<std::uint8_t> encode_join() {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(MsgType::Join));
    return std::move(w).take();
}

std::vector<std::uint8_t> encode_join_ack(const JoinAck& a) {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(MsgType::JoinAck));
    w.u16(a.player);
    w.u32(a.head);
    w.u32(a.left_hand);
    w.u32(a.right_hand);
    return std::move(w).take();
}

JoinAck decode_join_ack(std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    expect_type(r, MsgType::JoinAck, "join ack");
    JoinAck a;
    a.player = r.u16();
    a.head = r.u32();
    a.left_hand = r.u32();
    a.right_hand = r.u32();
    if (!r.done()) throw WireError("trailing bytes after join ack");
    return a;
}

std::vector<std::uint8_t> encode_destroy(std::span<const EntityId> ids) {
    if (ids.size() > 0xFFFF) throw WireError("too many entities for one destroy message");
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(MsgType::DestroyEntity));
    w.u16(static_cast<std::uint16_t>(ids.size()));
    for (EntityId id : ids) w.u32(id);
    return std::move(w).take();
}

std::vector<EntityId> decode_destroy(std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    expect_type(r, MsgType::DestroyEntity, "destroy message");
    const std::uint16_t count = r.u16();
    std::vector<EntityId> ids;
    ids.reserve(count);
    for (std::uint16_t k = 0; k < count; ++k) ids.push_back(r.u32());
    if (!r.done()) throw WireError("trailing bytes after destroy message");
    return ids;
}

std::vector<std::uint8_t> encode_softbody_particles(const SoftbodyParticlesMsg& m) {
    if (m.particles.size() > 0xFFFF) throw WireError("too many particles for one message");
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(MsgType::SoftbodyParticles));
    w.u32(m.tick);
    w.u32(m.entity);
    w.u16(static_cast<std::uint16_t>(m.particles.size()));
    for (const Vec3& p : m.particles) w.vec3(p);
    return std::move(w).take();
}

SoftbodyParticlesMsg decode_softbody_particles(std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    expect_type(r, MsgType::SoftbodyParticles, "softbody particles");
    SoftbodyParticlesMsg m;
    m.tick = r.u32();
    m.entity = r.u32();
    const std::uint16_t count = r.u16();
    m.particles.reserve(count);
    for (std::uint16_t k = 0; k < count; ++k) m.particles.push_back(r.vec3());
    if (!r.done()) throw WireError("trailing bytes after softbody particles");
    return m;
}

} // namespace physlink::wire
