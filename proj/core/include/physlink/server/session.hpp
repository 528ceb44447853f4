#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "physlink/pcc.hpp"
#include "physlink/physics/world.hpp"
#include "physlink/scene_graph.hpp"
#include "physlink/wire/messages.hpp"

namespace physlink::server {

class SessionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Per-entity send pacing: a due-time accumulator in tick units. Critical
// entities run at the high rate, everything else at the default rate.
class SendScheduler {
public:
    SendScheduler(float tick_hz, float default_rate, float critical_rate)
        : tick_hz_(tick_hz), default_rate_(default_rate), critical_rate_(critical_rate) {}

    void add_entity(EntityId id, bool critical);
    void remove_entity(EntityId id) { entries_.erase(id); }
    void set_critical(EntityId id, bool critical);
    bool is_critical(EntityId id) const;

    // Entities due at this tick, ascending; advances their due times.
    std::vector<EntityId> due(std::uint32_t tick);

private:
    struct Entry {
        bool critical = false;
        double next_due = 0;
    };
    double period(bool critical) const { return tick_hz_ / (critical ? critical_rate_ : default_rate_); }

    float tick_hz_;
    float default_rate_;
    float critical_rate_;
    std::map<EntityId, Entry> entries_;
};

struct SessionConfig {
    phys::WorldConfig world{};
    float default_rate = 12.0f;  // Hz
    float critical_rate = 48.0f; // Hz
    float pos_eps = wire::kDefaultPosEps;
    float rot_eps = wire::kDefaultRotEps;
    // MoveToTransform keeps its entity critical for this many ticks past the
    // last command (about two critical send intervals at defaults).
    std::uint32_t command_critical_ticks = 2;
};

struct AvatarIds {
    EntityId head = kNoEntity;
    EntityId left_hand = kNoEntity;
    EntityId right_hand = kNoEntity;
};

struct TickOutput {
    std::uint32_t tick = 0;
    std::vector<wire::TransformRecord> records;
    std::vector<CollisionEvent> events;
    std::vector<wire::SoftbodyParticlesMsg> softbodies;
};

inline constexpr float kHandSolidRadius = 0.05f;
inline constexpr float kHandHoverRadius = 0.15f;

// Authoritative session state: the world, the scene hierarchy replicated from
// the first client, players and their avatars, grab arbitration, and the
// selective-sync diffing against last-sent transforms. Transport-free; hosts
// feed decoded commands in and fan the TickOutput out.
class Session {
public:
    explicit Session(SessionConfig cfg = {});

    bool initialized() const { return initialized_; }

    // First client's dissected scene. Validates every container, replicates
    // hierarchy, instantiates physics. Second call is an error.
    void initialize_from_batch(std::span<const Pcc> pccs);

    // Adds scene content after initialization (bot interactables, props).
    void spawn_container(const Pcc& pcc);
    void attach_softbody(EntityId id, phys::SoftBody body);
    // Hands out the next free entity id so spawned content never collides
    // with avatar allocation.
    EntityId reserve_entity_id() { return next_entity_++; }

    PlayerId join();
    AvatarIds avatar_of(PlayerId player) const;
    // Destroys the player's avatar; returns the destroyed entity ids.
    std::vector<EntityId> leave(PlayerId player);

    void move_to_transform(PlayerId player, EntityId entity, const Transform& target);
    bool grab(PlayerId player, EntityId entity);
    void release(PlayerId player, EntityId entity);

    TickOutput tick();

    wire::Snapshot snapshot() const;

    phys::World& world() { return world_; }
    const phys::World& world() const { return world_; }
    const SceneGraph& scene() const { return scene_; }
    const SessionConfig& config() const { return cfg_; }
    SendScheduler& scheduler() { return scheduler_; }
    std::uint64_t rejected_commands() const { return rejected_commands_; }
    PlayerId grabber_of(EntityId entity) const;

private:
    bool entity_is_critical(EntityId id) const;
    void refresh_criticality(EntityId id);
    bool player_hand_hovers(PlayerId player, EntityId entity) const;

    SessionConfig cfg_;
    phys::World world_;
    SceneGraph scene_;
    SendScheduler scheduler_;
    bool initialized_ = false;

    PlayerId next_player_ = 1;
    EntityId next_entity_ = 1;
    std::map<PlayerId, AvatarIds> players_;
    std::set<EntityId> avatar_entities_;
    std::map<EntityId, PlayerId> grabbed_;
    std::map<EntityId, std::uint32_t> command_critical_until_;

    std::map<EntityId, Transform> last_sent_;
    std::vector<CollisionEvent> pending_events_;
    std::uint64_t rejected_commands_ = 0;
};

} // namespace physlink::server
