#include "physlink/server/session.hpp"

#include <algorithm>
#include <string>

namespace physlink::server {

void SendScheduler::add_entity(EntityId id, bool critical) {
    entries_.emplace(id, Entry{critical, 0.0});
}

void SendScheduler::set_critical(EntityId id, bool critical) {
    auto it = entries_.find(id);
    if (it == entries_.end()) return;
    if (critical && !it->second.critical) it->second.next_due = 0; // react on the next tick
    it->second.critical = critical;
}

bool SendScheduler::is_critical(EntityId id) const {
    auto it = entries_.find(id);
    return it != entries_.end() && it->second.critical;
}

std::vector<EntityId> SendScheduler::due(std::uint32_t tick) {
    std::vector<EntityId> out;
    for (auto& [id, entry] : entries_) {
        if (static_cast<double>(tick) < entry.next_due) continue;
        out.push_back(id);
        entry.next_due += period(entry.critical);
        if (entry.next_due <= static_cast<double>(tick)) // stale after inactivity: no bursts
            entry.next_due = static_cast<double>(tick) + period(entry.critical);
    }
    return out;
}

Session::Session(SessionConfig cfg)
    : cfg_(cfg),
      world_(cfg.world),
      scheduler_(1.0f / cfg.world.dt, cfg.default_rate, cfg.critical_rate) {}

void Session::initialize_from_batch(std::span<const Pcc> pccs) {
    if (initialized_) throw SessionError("session already initialized");
    for (const Pcc& p : pccs) {
        const auto violations = validate_pcc(p);
        if (!violations.empty())
            throw SessionError("container " + std::to_string(p.entity_id) + ": " + violations.front());
    }
    for (const Pcc& p : pccs) {
        if (p.parent_id != kNoEntity && !scene_.contains(p.parent_id))
            throw SessionError("container " + std::to_string(p.entity_id) + ": unknown parent " +
                               std::to_string(p.parent_id));
        Transform local = p.transform;
        if (p.parent_id != kNoEntity)
            local = relative(world_.transform_of(p.parent_id), p.transform);
        scene_.add_node(p.entity_id, p.parent_id, local);
        world_.spawn_from_container(p);
        scheduler_.add_entity(p.entity_id, false);
        last_sent_[p.entity_id] = p.transform;
        next_entity_ = std::max(next_entity_, p.entity_id + 1);
    }
    for (const Pcc& p : pccs)
        for (const SpringSpec& s : p.springs)
            world_.add_spring(p.entity_id, s.other, s.rest_length, s.stiffness, s.damping);
    initialized_ = true;
}

void Session::spawn_container(const Pcc& pcc) {
    if (!initialized_) throw SessionError("session not initialized");
    const auto violations = validate_pcc(pcc);
    if (!violations.empty())
        throw SessionError("container " + std::to_string(pcc.entity_id) + ": " + violations.front());
    Transform local = pcc.transform;
    if (pcc.parent_id != kNoEntity)
        local = relative(world_.transform_of(pcc.parent_id), pcc.transform);
    scene_.add_node(pcc.entity_id, pcc.parent_id, local);
    world_.spawn_from_container(pcc);
    for (const SpringSpec& s : pcc.springs)
        world_.add_spring(pcc.entity_id, s.other, s.rest_length, s.stiffness, s.damping);
    scheduler_.add_entity(pcc.entity_id, false);
    last_sent_[pcc.entity_id] = pcc.transform;
    next_entity_ = std::max(next_entity_, pcc.entity_id + 1);
}

void Session::attach_softbody(EntityId id, phys::SoftBody body) {
    world_.attach_softbody(id, std::move(body));
}

PlayerId Session::join() {
    if (!initialized_) throw SessionError("session not initialized");
    const PlayerId player = next_player_++;
    const float px = 2.0f * static_cast<float>(player);

    AvatarIds ids;
    ids.head = next_entity_++;
    ids.left_hand = next_entity_++;
    ids.right_hand = next_entity_++;

    const Transform head_pose{{px, 1.6f, 0.0f}, Quat::identity()};
    world_.spawn(ids.head, head_pose);
    world_.entity_mut(ids.head).owner = player;
    BodySpec head_body;
    head_body.kinematic = true;
    world_.attach_body(ids.head, head_body);
    scene_.add_node(ids.head, kNoEntity, head_pose);

    const Transform hand_poses[2] = {
        {{px - 0.3f, 1.2f, 0.3f}, Quat::identity()},
        {{px + 0.3f, 1.2f, 0.3f}, Quat::identity()},
    };
    const EntityId hands[2] = {ids.left_hand, ids.right_hand};
    for (int i = 0; i < 2; ++i) {
        world_.spawn(hands[i], hand_poses[i]);
        world_.entity_mut(hands[i]).owner = player;
        world_.attach_body(hands[i], BodySpec{1.0f, false, 0.0f, 0.0f});
        world_.attach_collider(hands[i], ColliderSpec{SphereShape{kHandSolidRadius}, false});
        world_.attach_collider(hands[i], ColliderSpec{SphereShape{kHandHoverRadius}, true});
        world_.apply_move_to_transform(hands[i], hand_poses[i]); // hold pose until driven
        scene_.add_node(hands[i], kNoEntity, hand_poses[i]);
    }

    for (EntityId id : {ids.head, ids.left_hand, ids.right_hand}) {
        avatar_entities_.insert(id);
        scheduler_.add_entity(id, true);
        last_sent_[id] = world_.transform_of(id);
    }
    players_.emplace(player, ids);
    return player;
}

AvatarIds Session::avatar_of(PlayerId player) const {
    auto it = players_.find(player);
    if (it == players_.end()) throw SessionError("unknown player " + std::to_string(player));
    return it->second;
}

std::vector<EntityId> Session::leave(PlayerId player) {
    const AvatarIds ids = avatar_of(player);
    std::vector<EntityId> held;
    for (const auto& [entity, holder] : grabbed_)
        if (holder == player) held.push_back(entity);
    for (EntityId entity : held) {
        grabbed_.erase(entity);
        world_.clear_move_target(entity);
        refresh_criticality(entity);
    }
    std::vector<EntityId> destroyed;
    for (EntityId id : {ids.head, ids.left_hand, ids.right_hand}) {
        auto exits = world_.destroy(id);
        pending_events_.insert(pending_events_.end(), exits.begin(), exits.end());
        scene_.remove_node(id);
        scheduler_.remove_entity(id);
        avatar_entities_.erase(id);
        last_sent_.erase(id);
        command_critical_until_.erase(id);
        destroyed.push_back(id);
    }
    players_.erase(player);
    return destroyed;
}

bool Session::player_hand_hovers(PlayerId player, EntityId entity) const {
    auto it = players_.find(player);
    if (it == players_.end()) return false;
    return world_.in_contact(it->second.left_hand, entity) ||
           world_.in_contact(it->second.right_hand, entity);
}

void Session::move_to_transform(PlayerId player, EntityId entity, const Transform& target) {
    if (!world_.contains(entity)) {
        ++rejected_commands_;
        return;
    }
    const bool owns = world_.entity(entity).owner == player && player != kWorldOwner;
    auto grab_it = grabbed_.find(entity);
    const bool grabbed_by_player = grab_it != grabbed_.end() && grab_it->second == player;
    if (!owns && !grabbed_by_player) {
        ++rejected_commands_;
        return;
    }
    world_.apply_move_to_transform(entity, target);
    command_critical_until_[entity] = world_.tick() + cfg_.command_critical_ticks;
    refresh_criticality(entity);
}

bool Session::grab(PlayerId player, EntityId entity) {
    if (!world_.contains(entity) || !world_.entity(entity).interactable) return false;
    if (grabbed_.count(entity)) return false; // first grabber holds it
    if (!player_hand_hovers(player, entity)) return false;
    grabbed_[entity] = player;
    refresh_criticality(entity);
    return true;
}

void Session::release(PlayerId player, EntityId entity) {
    auto it = grabbed_.find(entity);
    if (it == grabbed_.end() || it->second != player) return;
    grabbed_.erase(it);
    world_.clear_move_target(entity);
    refresh_criticality(entity);
}

PlayerId Session::grabber_of(EntityId entity) const {
    auto it = grabbed_.find(entity);
    return it == grabbed_.end() ? kWorldOwner : it->second;
}

bool Session::entity_is_critical(EntityId id) const {
    if (avatar_entities_.count(id)) return true;
    if (grabbed_.count(id)) return true;
    auto it = command_critical_until_.find(id);
    return it != command_critical_until_.end() && it->second >= world_.tick();
}

void Session::refresh_criticality(EntityId id) {
    scheduler_.set_critical(id, entity_is_critical(id));
}

TickOutput Session::tick() {
    if (!initialized_) throw SessionError("session not initialized");
    TickOutput out;
    out.events = world_.step();
    if (!pending_events_.empty()) {
        out.events.insert(out.events.begin(), pending_events_.begin(), pending_events_.end());
        pending_events_.clear();
    }
    out.tick = world_.tick();

    for (auto it = command_critical_until_.begin(); it != command_critical_until_.end();) {
        if (it->second < out.tick) {
            const EntityId id = it->first;
            it = command_critical_until_.erase(it);
            if (world_.contains(id)) refresh_criticality(id);
        } else {
            ++it;
        }
    }

    for (EntityId id : scheduler_.due(out.tick)) {
        const phys::Entity& e = world_.entity(id);
        if (e.soft) {
            wire::SoftbodyParticlesMsg msg;
            msg.tick = out.tick;
            msg.entity = id;
            msg.particles.reserve(e.soft->particles.size());
            for (const phys::SoftParticle& p : e.soft->particles) msg.particles.push_back(p.position);
            out.softbodies.push_back(std::move(msg));
            continue;
        }
        Transform& prev = last_sent_[id];
        const std::uint8_t mask = wire::diff_transform(prev, e.pose, cfg_.pos_eps, cfg_.rot_eps);
        if (mask == 0) continue;
        wire::TransformRecord rec;
        rec.entity_id = id;
        rec.owner = e.owner;
        rec.mask = mask;
        rec.position = e.pose.position;
        rec.rotation = e.pose.rotation;
        out.records.push_back(rec);
        prev = wire::apply_record(prev, rec);
    }
    return out;
}

wire::Snapshot Session::snapshot() const {
    wire::Snapshot snap;
    snap.tick = world_.tick();
    for (const auto& [id, e] : world_.entities()) {
        if (e.soft) {
            wire::SoftbodySnapshot s;
            s.entity_id = id;
            s.particles.reserve(e.soft->particles.size());
            for (const phys::SoftParticle& p : e.soft->particles) s.particles.push_back(p.position);
            snap.softbodies.push_back(std::move(s));
        }
        wire::SnapshotEntity se;
        se.entity_id = id;
        se.owner = e.owner;
        se.flags = static_cast<std::uint8_t>((e.interactable ? wire::kSnapInteractable : 0) |
                                             (e.body && e.body->kinematic ? wire::kSnapKinematic : 0));
        se.transform = e.pose;
        snap.entities.push_back(se);
    }
    return snap;
}

} // namespace physlink::server
