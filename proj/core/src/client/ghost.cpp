#include "physlink/client/ghost.hpp"

#include <algorithm>

#include "physlink/dual_quaternion.hpp"

namespace physlink::client {

std::vector<Pcc> GhostController::dissect_scene(LocalScene& scene) {
    const std::size_t n = scene.entities.size();
    for (const LocalEntity& e : scene.entities) {
        if (e.parent >= 0 && (static_cast<std::size_t>(e.parent) >= n))
            throw GhostError("entity '" + e.name + "' has an out-of-range parent");
    }
    {
        std::set<std::string> names;
        for (const LocalEntity& e : scene.entities)
            if (!names.insert(e.name).second) throw GhostError("duplicate entity name '" + e.name + "'");
    }

    // Closure: every physics-bearing entity plus all of its ancestors.
    std::vector<bool> keep(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (!scene.entities[i].has_physics()) continue;
        for (int v = static_cast<int>(i); v >= 0; v = scene.entities[v].parent) {
            if (keep[v]) break;
            keep[v] = true;
        }
    }

    // Depth-first preorder: roots in index order, children in index order.
    std::vector<std::vector<int>> children(n);
    std::vector<int> roots;
    for (std::size_t i = 0; i < n; ++i) {
        const int p = scene.entities[i].parent;
        if (p < 0) roots.push_back(static_cast<int>(i));
        else children[p].push_back(static_cast<int>(i));
    }
    std::vector<int> order;
    order.reserve(n);
    std::vector<int> stack(roots.rbegin(), roots.rend());
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        order.push_back(v);
        for (auto it = children[v].rbegin(); it != children[v].rend(); ++it) stack.push_back(*it);
    }

    std::vector<EntityId> assigned(n, kNoEntity);
    EntityId next = 1;
    for (int v : order)
        if (keep[v]) assigned[v] = next++;

    std::vector<Transform> world(n);
    for (int v : order) {
        const LocalEntity& e = scene.entities[v];
        world[v] = e.parent < 0 ? e.local : compose(world[e.parent], e.local);
    }

    std::vector<Pcc> batch;
    for (int v : order) {
        if (!keep[v]) continue;
        LocalEntity& e = scene.entities[v];
        Pcc p;
        p.entity_id = assigned[v];
        p.parent_id = e.parent < 0 ? kNoEntity : assigned[e.parent];
        p.owner = kWorldOwner;
        p.transform = world[v];
        p.interactable = e.interactable;
        if (e.has_physics()) {
            p.body = e.body;
            p.collider = e.collider;
            for (const LocalSpring& s : e.springs) {
                if (s.other < 0 || static_cast<std::size_t>(s.other) >= n || assigned[s.other] == kNoEntity)
                    throw GhostError("entity '" + e.name + "' has a spring to a non-physics entity");
                p.springs.push_back({assigned[s.other], s.rest_length, s.stiffness, s.damping});
            }
        } else {
            p.transform_only = true;
        }
        batch.push_back(std::move(p));

        // Strip the extracted specs; the stripped scene keeps no physics.
        e.body.reset();
        e.collider.reset();
        e.springs.clear();

        GraphicsObject& g = ensure_gro(assigned[v]);
        g.interactable = scene.entities[v].interactable;
        name_to_id_[scene.entities[v].name] = assigned[v];
    }
    return batch;
}

GraphicsObject& GhostController::ensure_gro(EntityId id) {
    auto it = registry_.find(id);
    if (it == registry_.end()) {
        GraphicsObject g;
        g.entity = id;
        it = registry_.emplace(id, std::move(g)).first;
    }
    return it->second;
}

void GhostController::push_state(EntityId id, std::uint32_t tick, const Transform& t, double now, bool reset) {
    GraphicsObject& g = ensure_gro(id);
    if (reset) {
        g.prev.reset();
        g.curr = GraphicsObject::Sample{tick, t, now};
        return;
    }
    if (g.curr && tick <= g.curr->tick) {
        ++stale_updates_;
        return;
    }
    g.prev = g.curr;
    g.curr = GraphicsObject::Sample{tick, t, now};
}

void GhostController::on_join_ack(const wire::JoinAck& ack) {
    player_ = ack.player;
    avatar_ = ack;
    hands_[0].hand = ack.left_hand;
    hands_[1].hand = ack.right_hand;
}

void GhostController::on_snapshot(const wire::Snapshot& snap, double now) {
    for (const wire::SnapshotEntity& e : snap.entities) {
        GraphicsObject& g = ensure_gro(e.entity_id);
        g.interactable = (e.flags & wire::kSnapInteractable) != 0;
        push_state(e.entity_id, snap.tick, e.transform, now, true);
    }
    for (const wire::SoftbodySnapshot& s : snap.softbodies) {
        softbody_particles_[s.entity_id] = s.particles;
        softbody_ticks_[s.entity_id] = snap.tick;
    }
}

void GhostController::on_group_update(const wire::GroupedUpdate& msg, double now) {
    for (const wire::TransformRecord& rec : msg.records) {
        auto it = registry_.find(rec.entity_id);
        if (it == registry_.end()) {
            ++unknown_records_;
            continue;
        }
        const Transform base = it->second.curr ? it->second.curr->transform : Transform{};
        push_state(rec.entity_id, msg.tick, wire::apply_record(base, rec), now, false);
    }
}

void GhostController::on_softbody_particles(const wire::SoftbodyParticlesMsg& msg) {
    auto it = softbody_ticks_.find(msg.entity);
    if (it != softbody_ticks_.end() && msg.tick <= it->second) {
        ++stale_updates_;
        return;
    }
    softbody_ticks_[msg.entity] = msg.tick;
    softbody_particles_[msg.entity] = msg.particles;
}

void GhostController::on_collision_event(const CollisionEvent& ev) {
    GraphicsObject& a = ensure_gro(ev.a);
    GraphicsObject& b = ensure_gro(ev.b);
    if (ev.kind == ContactKind::Enter) {
        a.colliding.insert(ev.b);
        b.colliding.insert(ev.a);
    } else {
        a.colliding.erase(ev.b);
        b.colliding.erase(ev.a);
    }

    for (Interactor& hand : hands_) {
        if (hand.hand == kNoEntity || (ev.a != hand.hand && ev.b != hand.hand)) continue;
        const EntityId other = ev.a == hand.hand ? ev.b : ev.a;
        const GraphicsObject* og = gro(other);
        if (!og || !og->interactable) continue;
        auto pos = std::find(hand.hover_stack.begin(), hand.hover_stack.end(), other);
        if (ev.kind == ContactKind::Enter) {
            if (pos == hand.hover_stack.end()) hand.hover_stack.push_back(other);
        } else if (pos != hand.hover_stack.end()) {
            hand.hover_stack.erase(pos);
        }
    }

    for (const auto& cb : collision_subscribers_) cb(ev);
}

void GhostController::on_destroy(std::span<const EntityId> ids) {
    for (EntityId id : ids) {
        registry_.erase(id);
        softbody_particles_.erase(id);
        softbody_ticks_.erase(id);
        for (auto& [eid, g] : registry_) g.colliding.erase(id);
        for (Interactor& hand : hands_) {
            std::erase(hand.hover_stack, id);
            if (hand.interacting && hand.target == id) {
                hand.interacting = false;
                hand.target = kNoEntity;
            }
        }
    }
}

std::optional<Transform> GhostController::sample_render_transform(EntityId id, double now) const {
    auto it = registry_.find(id);
    if (it == registry_.end() || !it->second.curr) return std::nullopt;
    const GraphicsObject& g = it->second;
    if (!g.prev) return g.curr->transform;
    const double gap = static_cast<double>(g.curr->tick - g.prev->tick) * cfg_.dt;
    if (gap <= 0) return g.curr->transform;
    // Play one interval behind the newest state so a bracketing pair always
    // exists; clamp to the newest when the stream starves.
    const double t = std::clamp((now - g.curr->arrival) / gap, 0.0, 1.0);
    const DualQuaternion a = DualQuaternion::from_transform(g.prev->transform);
    const DualQuaternion b = DualQuaternion::from_transform(g.curr->transform);
    return blend(a, b, static_cast<float>(t)).to_transform();
}

const std::vector<Vec3>* GhostController::softbody_particles(EntityId id) const {
    auto it = softbody_particles_.find(id);
    return it == softbody_particles_.end() ? nullptr : &it->second;
}

Transform GhostController::latest_transform(EntityId id) const {
    auto it = registry_.find(id);
    if (it == registry_.end() || !it->second.curr) return {};
    return it->second.curr->transform;
}

EntityId GhostController::hovered(int hand) const {
    const auto& stack = hands_[hand].hover_stack;
    return stack.empty() ? kNoEntity : stack.back();
}

std::vector<OutCommand> GhostController::update_hand(int hand, const Transform& hand_pose, bool grab_button) {
    Interactor& h = hands_[hand];
    std::vector<OutCommand> out;
    const bool pressed = grab_button && !h.button;
    const bool released = !grab_button && h.button;
    h.button = grab_button;

    if (pressed && !h.interacting) {
        const EntityId target = h.hover_stack.empty() ? kNoEntity : h.hover_stack.back();
        if (target != kNoEntity) {
            h.interacting = true;
            h.target = target;
            h.grip_offset = relative(hand_pose, latest_transform(target));
            out.push_back({OutCommand::Kind::GrabStart, target, {}});
        }
        return out;
    }
    if (h.interacting && grab_button && !pressed) {
        out.push_back({OutCommand::Kind::MoveTo, h.target, compose(hand_pose, h.grip_offset)});
        return out;
    }
    if (released && h.interacting) {
        out.push_back({OutCommand::Kind::GrabEnd, h.target, {}});
        h.interacting = false;
        h.target = kNoEntity;
    }
    return out;
}

std::vector<OutCommand> GhostController::drive_avatar(const Transform& head, const Transform& left,
                                                      const Transform& right) {
    if (!joined()) throw GhostError("avatar not spawned yet");
    return {
        {OutCommand::Kind::MoveTo, avatar_.head, head},
        {OutCommand::Kind::MoveTo, avatar_.left_hand, left},
        {OutCommand::Kind::MoveTo, avatar_.right_hand, right},
    };
}

void GhostController::subscribe_collision(std::function<void(const CollisionEvent&)> callback) {
    collision_subscribers_.push_back(std::move(callback));
}

const GraphicsObject* GhostController::gro(EntityId id) const {
    auto it = registry_.find(id);
    return it == registry_.end() ? nullptr : &it->second;
}

} // namespace physlink::client
