#include "physlink/physics/world.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

namespace physlink::phys {

namespace {

struct Aabb {
    Vec3 min;
    Vec3 max;
};

Aabb shape_bounds(const Shape& shape, const Vec3& center) {
    if (const auto* s = std::get_if<SphereShape>(&shape)) {
        const Vec3 r{s->radius, s->radius, s->radius};
        return {center - r, center + r};
    }
    const auto& b = std::get<BoxShape>(shape);
    return {center - b.half_extents, center + b.half_extents};
}

struct Overlap {
    Vec3 normal; // unit, a -> b
    float penetration;
};

std::optional<Overlap> sphere_sphere(const Vec3& pa, float ra, const Vec3& pb, float rb) {
    const Vec3 d = pb - pa;
    const float dist2 = length_sq(d);
    const float rsum = ra + rb;
    if (dist2 >= rsum * rsum) return std::nullopt;
    const float dist = std::sqrt(dist2);
    const Vec3 n = dist > 1e-9f ? d / dist : Vec3{0, 1, 0};
    return Overlap{n, rsum - dist};
}

std::optional<Overlap> sphere_box(const Vec3& pa, float ra, const Vec3& pb, const Vec3& he) {
    const Vec3 bmin = pb - he;
    const Vec3 bmax = pb + he;
    const Vec3 closest{std::clamp(pa.x, bmin.x, bmax.x),
                       std::clamp(pa.y, bmin.y, bmax.y),
                       std::clamp(pa.z, bmin.z, bmax.z)};
    const Vec3 d = pa - closest;
    const float dist2 = length_sq(d);
    if (dist2 > 1e-12f) {
        const float dist = std::sqrt(dist2);
        if (dist >= ra) return std::nullopt;
        return Overlap{d / dist * -1.0f, ra - dist};
    }
    // Center inside the box: exit through the nearest face.
    float best = bmax.x - pa.x;
    Vec3 out{1, 0, 0};
    if (pa.x - bmin.x < best) { best = pa.x - bmin.x; out = {-1, 0, 0}; }
    if (bmax.y - pa.y < best) { best = bmax.y - pa.y; out = {0, 1, 0}; }
    if (pa.y - bmin.y < best) { best = pa.y - bmin.y; out = {0, -1, 0}; }
    if (bmax.z - pa.z < best) { best = bmax.z - pa.z; out = {0, 0, 1}; }
    if (pa.z - bmin.z < best) { best = pa.z - bmin.z; out = {0, 0, -1}; }
    return Overlap{-out, best + ra};
}

std::optional<Overlap> box_box(const Vec3& pa, const Vec3& ha, const Vec3& pb, const Vec3& hb) {
    const float ox = (ha.x + hb.x) - std::fabs(pb.x - pa.x);
    if (ox <= 0) return std::nullopt;
    const float oy = (ha.y + hb.y) - std::fabs(pb.y - pa.y);
    if (oy <= 0) return std::nullopt;
    const float oz = (ha.z + hb.z) - std::fabs(pb.z - pa.z);
    if (oz <= 0) return std::nullopt;
    if (ox <= oy && ox <= oz) return Overlap{{pb.x >= pa.x ? 1.0f : -1.0f, 0, 0}, ox};
    if (oy <= oz) return Overlap{{0, pb.y >= pa.y ? 1.0f : -1.0f, 0}, oy};
    return Overlap{{0, 0, pb.z >= pa.z ? 1.0f : -1.0f}, oz};
}

std::optional<Overlap> collide_shapes(const Shape& sa, const Vec3& pa, const Shape& sb, const Vec3& pb) {
    if (const auto* a = std::get_if<SphereShape>(&sa)) {
        if (const auto* b = std::get_if<SphereShape>(&sb)) return sphere_sphere(pa, a->radius, pb, b->radius);
        return sphere_box(pa, a->radius, pb, std::get<BoxShape>(sb).half_extents);
    }
    const auto& a = std::get<BoxShape>(sa);
    if (const auto* b = std::get_if<SphereShape>(&sb)) {
        auto hit = sphere_box(pb, b->radius, pa, a.half_extents);
        if (!hit) return std::nullopt;
        return Overlap{-hit->normal, hit->penetration};
    }
    return box_box(pa, a.half_extents, pb, std::get<BoxShape>(sb).half_extents);
}

std::pair<EntityId, EntityId> canon(EntityId a, EntityId b) {
    return b < a ? std::make_pair(b, a) : std::make_pair(a, b);
}

} // namespace

void World::spawn(EntityId id, const Transform& pose) {
    if (id == kNoEntity) throw PhysicsError("entity id 0 is reserved");
    if (entities_.count(id)) throw PhysicsError("entity " + std::to_string(id) + " already exists");
    Entity e;
    e.pose = pose;
    entities_.emplace(id, std::move(e));
}

void World::spawn_from_container(const Pcc& pcc) {
    spawn(pcc.entity_id, pcc.transform);
    Entity& e = entities_.at(pcc.entity_id);
    e.interactable = pcc.interactable;
    e.transform_only = pcc.transform_only;
    e.owner = pcc.owner;
    if (pcc.body) attach_body(pcc.entity_id, *pcc.body);
    if (pcc.collider) attach_collider(pcc.entity_id, *pcc.collider);
}

void World::attach_body(EntityId id, const BodySpec& spec) {
    Entity& e = entity_mut(id);
    if (e.body) throw PhysicsError("entity " + std::to_string(id) + " already has a body");
    Body b;
    b.mass = spec.mass;
    b.kinematic = spec.kinematic;
    b.inv_mass = spec.kinematic ? 0.0f : 1.0f / spec.mass;
    b.linear_damping = spec.linear_damping;
    b.restitution = spec.restitution;
    e.body = b;
}

void World::attach_collider(EntityId id, const ColliderSpec& spec) {
    entity_mut(id).colliders.push_back(spec);
}

void World::attach_softbody(EntityId id, SoftBody body) {
    Entity& e = entity_mut(id);
    if (e.soft) throw PhysicsError("entity " + std::to_string(id) + " already has a softbody");
    e.soft = std::move(body);
}

void World::add_spring(EntityId a, EntityId b, float rest_length, float stiffness, float damping) {
    if (a == b) throw PhysicsError("spring endpoints must differ");
    entity(a);
    entity(b);
    auto [lo, hi] = canon(a, b);
    Spring s{lo, hi, rest_length, stiffness, damping};
    auto pos = std::lower_bound(springs_.begin(), springs_.end(), s, [](const Spring& x, const Spring& y) {
        return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });
    if (pos != springs_.end() && pos->a == lo && pos->b == hi)
        throw PhysicsError("duplicate spring between " + std::to_string(lo) + " and " + std::to_string(hi));
    springs_.insert(pos, s);
}

std::vector<CollisionEvent> World::destroy(EntityId id) {
    entity(id);
    std::vector<CollisionEvent> exits;
    for (auto it = contact_pairs_.begin(); it != contact_pairs_.end();) {
        if (it->first == id || it->second == id) {
            exits.push_back(make_collision_event(ContactKind::Exit, it->first, it->second, tick_));
            it = contact_pairs_.erase(it);
        } else {
            ++it;
        }
    }
    std::erase_if(springs_, [id](const Spring& s) { return s.a == id || s.b == id; });
    entities_.erase(id);
    return exits;
}

const Entity& World::entity(EntityId id) const {
    auto it = entities_.find(id);
    if (it == entities_.end()) throw PhysicsError("unknown entity " + std::to_string(id));
    return it->second;
}

Entity& World::entity_mut(EntityId id) {
    auto it = entities_.find(id);
    if (it == entities_.end()) throw PhysicsError("unknown entity " + std::to_string(id));
    return it->second;
}

void World::teleport(EntityId id, const Transform& pose) {
    entity_mut(id).pose = pose;
}

void World::apply_move_to_transform(EntityId id, const Transform& target) {
    Entity& e = entity_mut(id);
    if (!e.body) throw PhysicsError("entity " + std::to_string(id) + " has no body to drive");
    if (e.body->kinematic) {
        e.pose = target;
        e.body->velocity = {};
        return;
    }
    e.body->move_target = target;
}

void World::clear_move_target(EntityId id) {
    Entity& e = entity_mut(id);
    if (e.body) e.body->move_target.reset();
}

bool World::in_contact(EntityId a, EntityId b) const {
    return contact_pairs_.count(canon(a, b)) != 0;
}

void World::integrate_velocities() {
    const float dt = cfg_.dt;
    for (auto& [id, e] : entities_) {
        if (!e.body || e.body->kinematic) continue;
        Body& b = *e.body;
        if (b.move_target) {
            // Velocity drive: the body heads for the target but still takes
            // part in collision resolution. Gravity is overridden while driven.
            b.velocity = clamp_length((b.move_target->position - e.pose.position) * cfg_.drive_kp,
                                      cfg_.drive_v_max);
            const float alpha = std::min(1.0f, cfg_.drive_kp * dt);
            e.pose.rotation = slerp(e.pose.rotation, b.move_target->rotation, alpha);
        } else {
            b.velocity += cfg_.gravity * dt;
        }
    }
}

void World::apply_spring_forces() {
    const float dt = cfg_.dt;
    for (const Spring& s : springs_) {
        Entity& ea = entities_.at(s.a);
        Entity& eb = entities_.at(s.b);
        const Vec3 d = eb.pose.position - ea.pose.position;
        const float len = length(d);
        if (len < 1e-9f) continue;
        const Vec3 n = d / len;
        const Vec3 va = ea.body ? ea.body->velocity : Vec3{};
        const Vec3 vb = eb.body ? eb.body->velocity : Vec3{};
        const float f = s.stiffness * (len - s.rest_length) + s.damping * dot(vb - va, n);
        if (ea.body && !ea.body->kinematic) ea.body->velocity += n * (f * ea.body->inv_mass * dt);
        if (eb.body && !eb.body->kinematic) eb.body->velocity -= n * (f * eb.body->inv_mass * dt);
    }
}

void World::detect_contacts(std::vector<Contact>& out) const {
    struct Item {
        EntityId id;
        const ColliderSpec* collider;
        Aabb bounds;
    };
    std::vector<Item> items;
    for (const auto& [id, e] : entities_) {
        for (const ColliderSpec& c : e.colliders)
            items.push_back({id, &c, shape_bounds(c.shape, e.pose.position)});
    }
    if (items.size() < 2) return;

    const float cell = cfg_.grid_cell;
    const auto cell_of = [cell](float v) { return static_cast<int>(std::floor(v / cell)); };
    const auto key_of = [](int x, int y, int z) {
        const auto m = [](int v) { return static_cast<std::uint64_t>(v) & 0x1FFFFF; };
        return m(x) | (m(y) << 21) | (m(z) << 42);
    };
    // Items spanning many cells (room-sized static slabs) would bloat the
    // grid; they pair against everything instead.
    constexpr std::int64_t kGlobalCellLimit = 64;

    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid;
    grid.reserve(items.size() * 2);
    std::vector<std::uint32_t> globals;
    for (std::uint32_t i = 0; i < items.size(); ++i) {
        const Aabb& b = items[i].bounds;
        const int x0 = cell_of(b.min.x), x1 = cell_of(b.max.x);
        const int y0 = cell_of(b.min.y), y1 = cell_of(b.max.y);
        const int z0 = cell_of(b.min.z), z1 = cell_of(b.max.z);
        const std::int64_t span = static_cast<std::int64_t>(x1 - x0 + 1) * (y1 - y0 + 1) * (z1 - z0 + 1);
        if (span > kGlobalCellLimit) {
            globals.push_back(i);
            continue;
        }
        for (int x = x0; x <= x1; ++x)
            for (int y = y0; y <= y1; ++y)
                for (int z = z0; z <= z1; ++z)
                    grid[key_of(x, y, z)].push_back(i);
    }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> candidates;
    for (const auto& [key, bucket] : grid) {
        for (std::size_t i = 0; i + 1 < bucket.size(); ++i)
            for (std::size_t j = i + 1; j < bucket.size(); ++j) {
                const auto a = std::min(bucket[i], bucket[j]);
                const auto b = std::max(bucket[i], bucket[j]);
                if (items[a].id != items[b].id) candidates.emplace_back(a, b);
            }
    }
    for (std::uint32_t g : globals) {
        for (std::uint32_t i = 0; i < items.size(); ++i) {
            if (i == g) continue;
            const auto a = std::min(g, i);
            const auto b = std::max(g, i);
            if (items[a].id != items[b].id) candidates.emplace_back(a, b);
        }
    }
    // Hash iteration order is unspecified; sorting pins the contact order so
    // identical inputs resolve bit-identically.
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    const auto aabbs_touch = [](const Aabb& x, const Aabb& y) {
        return x.min.x <= y.max.x && y.min.x <= x.max.x && x.min.y <= y.max.y &&
               y.min.y <= x.max.y && x.min.z <= y.max.z && y.min.z <= x.max.z;
    };
    for (const auto& [ia, ib] : candidates) {
        const Item& a = items[ia];
        const Item& b = items[ib];
        if (!aabbs_touch(a.bounds, b.bounds)) continue;
        const auto hit = collide_shapes(a.collider->shape, entities_.at(a.id).pose.position,
                                        b.collider->shape, entities_.at(b.id).pose.position);
        if (!hit) continue;
        Contact c;
        c.a = a.id;
        c.b = b.id;
        c.normal = hit->normal;
        c.penetration = hit->penetration;
        c.solid = !a.collider->trigger && !b.collider->trigger;
        if (c.b < c.a) {
            std::swap(c.a, c.b);
            c.normal = -c.normal;
        }
        out.push_back(c);
    }
}

void World::resolve_impulses(const std::vector<Contact>& contacts) {
    for (const Contact& c : contacts) {
        if (!c.solid) continue;
        Entity& ea = entities_.at(c.a);
        Entity& eb = entities_.at(c.b);
        const float ima = ea.body ? ea.body->inv_mass : 0.0f;
        const float imb = eb.body ? eb.body->inv_mass : 0.0f;
        if (ima + imb == 0.0f) continue;
        const Vec3 va = ea.body ? ea.body->velocity : Vec3{};
        const Vec3 vb = eb.body ? eb.body->velocity : Vec3{};
        const float vn = dot(vb - va, c.normal);
        if (vn >= 0.0f) continue; // separating
        const float ra = ea.body ? ea.body->restitution : 0.0f;
        const float rb = eb.body ? eb.body->restitution : 0.0f;
        const float e = std::max(ra, rb);
        const float j = -(1.0f + e) * vn / (ima + imb);
        if (ea.body && !ea.body->kinematic) ea.body->velocity -= c.normal * (j * ima);
        if (eb.body && !eb.body->kinematic) eb.body->velocity += c.normal * (j * imb);
    }
}

void World::integrate_positions() {
    const float dt = cfg_.dt;
    for (auto& [id, e] : entities_) {
        if (!e.body || e.body->kinematic) continue;
        e.body->velocity = clamp_length(e.body->velocity, cfg_.max_speed);
        const float damp = 1.0f / (1.0f + e.body->linear_damping * dt);
        e.body->velocity *= damp;
        e.pose.position += e.body->velocity * dt;
    }
}

void World::correct_penetration(const std::vector<Contact>& contacts) {
    for (const Contact& c : contacts) {
        if (!c.solid) continue;
        Entity& ea = entities_.at(c.a);
        Entity& eb = entities_.at(c.b);
        const float ima = ea.body && !ea.body->kinematic ? ea.body->inv_mass : 0.0f;
        const float imb = eb.body && !eb.body->kinematic ? eb.body->inv_mass : 0.0f;
        if (ima + imb == 0.0f) continue;
        const float excess = c.penetration - cfg_.contact_slop;
        if (excess <= 0.0f) continue;
        const float total = cfg_.baumgarte * excess / (ima + imb);
        ea.pose.position -= c.normal * (total * ima);
        eb.pose.position += c.normal * (total * imb);
    }
}

void World::step_softbodies() {
    const float dt = cfg_.dt;
    for (auto& [id, e] : entities_) {
        if (!e.soft) continue;
        SoftBody& sb = *e.soft;
        for (SoftParticle& p : sb.particles) p.velocity += cfg_.gravity * dt;
        for (const SoftSpring& s : sb.springs) {
            SoftParticle& pi = sb.particles[s.i];
            SoftParticle& pj = sb.particles[s.j];
            const Vec3 d = pj.position - pi.position;
            const float len = length(d);
            if (len < 1e-9f) continue;
            const Vec3 n = d / len;
            const float f = s.stiffness * (len - s.rest_length) + s.damping * dot(pj.velocity - pi.velocity, n);
            pi.velocity += n * (f / pi.mass * dt);
            pj.velocity -= n * (f / pj.mass * dt);
        }
        for (SoftParticle& p : sb.particles) {
            p.velocity = clamp_length(p.velocity, cfg_.max_speed);
            p.position += p.velocity * dt;
        }
    }
}

void World::collide_particles() {
    // Push particles out of solid colliders and cancel their inward velocity,
    // so rigid shapes (including driven hands) can poke and carry softbodies.
    struct Solid {
        const Shape* shape;
        Vec3 center;
    };
    std::vector<Solid> solids;
    for (const auto& [id, e] : entities_) {
        for (const ColliderSpec& c : e.colliders)
            if (!c.trigger) solids.push_back({&c.shape, e.pose.position});
    }
    if (solids.empty()) return;

    for (auto& [id, e] : entities_) {
        if (!e.soft) continue;
        for (SoftParticle& p : e.soft->particles) {
            for (const Solid& s : solids) {
                std::optional<Overlap> hit;
                if (const auto* sp = std::get_if<SphereShape>(s.shape)) {
                    hit = sphere_sphere(p.position, 0.0f, s.center, sp->radius);
                } else {
                    hit = sphere_box(p.position, 0.0f, s.center, std::get<BoxShape>(*s.shape).half_extents);
                }
                if (!hit) continue;
                const Vec3 outward = -hit->normal; // normal points particle -> solid
                p.position += outward * hit->penetration;
                const float inward = dot(p.velocity, -outward);
                if (inward > 0.0f) p.velocity += outward * inward;
            }
        }
        Vec3 centroid{};
        for (const SoftParticle& p : e.soft->particles) centroid += p.position;
        e.pose.position = centroid / static_cast<float>(e.soft->particles.size());
    }
}

void World::emit_events(const std::vector<Contact>& contacts, std::vector<CollisionEvent>& out) {
    std::set<std::pair<EntityId, EntityId>> current;
    for (const Contact& c : contacts) current.emplace(c.a, c.b);
    for (const auto& pair : current)
        if (!contact_pairs_.count(pair))
            out.push_back(make_collision_event(ContactKind::Enter, pair.first, pair.second, tick_));
    for (const auto& pair : contact_pairs_)
        if (!current.count(pair))
            out.push_back(make_collision_event(ContactKind::Exit, pair.first, pair.second, tick_));
    contact_pairs_ = std::move(current);
}

void World::assert_finite() const {
    for (const auto& [id, e] : entities_) {
        bool ok = finite(e.pose);
        if (e.body) ok = ok && finite(e.body->velocity);
        if (e.soft)
            for (const SoftParticle& p : e.soft->particles)
                ok = ok && finite(p.position) && finite(p.velocity);
        if (!ok) throw PhysicsError("non-finite state on entity " + std::to_string(id));
    }
}

std::vector<CollisionEvent> World::step() {
    ++tick_;
    integrate_velocities();
    apply_spring_forces();

    std::vector<Contact> contacts;
    detect_contacts(contacts);
    resolve_impulses(contacts);
    integrate_positions();
    correct_penetration(contacts);

    step_softbodies();
    collide_particles();

    std::vector<CollisionEvent> events;
    emit_events(contacts, events);
    assert_finite();
    return events;
}

} // namespace physlink::phys
