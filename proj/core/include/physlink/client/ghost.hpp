#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "physlink/pcc.hpp"
#include "physlink/wire/messages.hpp"

namespace physlink::client {

class GhostError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Client-side scene description before dissection: a flat entity list with
// parent indices and optional physics specs.
struct LocalSpring {
    int other = -1; // index into LocalScene::entities
    float rest_length = 1.0f;
    float stiffness = 100.0f;
    float damping = 0.0f;
};

struct LocalEntity {
    std::string name;
    int parent = -1; // index, -1 = root
    Transform local{};
    bool interactable = false;
    std::optional<BodySpec> body;
    std::optional<ColliderSpec> collider;
    std::vector<LocalSpring> springs;

    bool has_physics() const { return body || collider || !springs.empty(); }
};

struct LocalScene {
    std::vector<LocalEntity> entities;
};

// Server-driven proxy for one entity: the last two authoritative states for
// interpolation plus collision bookkeeping.
struct GraphicsObject {
    struct Sample {
        std::uint32_t tick = 0;
        Transform transform{};
        double arrival = 0; // client clock when ingested
    };

    EntityId entity = kNoEntity;
    bool interactable = false;
    std::optional<Sample> prev;
    std::optional<Sample> curr;
    std::set<EntityId> colliding;
};

struct OutCommand {
    enum class Kind { GrabStart, GrabEnd, MoveTo };
    Kind kind = Kind::MoveTo;
    EntityId entity = kNoEntity;
    Transform target{};
};

struct GhostConfig {
    float dt = 0.02f; // server tick length, for converting tick gaps to seconds
};

// The GHost-side controller: dissects the local scene into containers, keeps
// the GraphicsObject registry fed by server updates, samples interpolated
// render transforms, and runs the per-hand grab state machine.
class GhostController {
public:
    explicit GhostController(GhostConfig cfg = {}) : cfg_(cfg) {}

    // Extracts physics specs into containers (hierarchy closure included),
    // strips them from the scene, assigns EntityIds in traversal order, and
    // registers a GraphicsObject per container.
    std::vector<Pcc> dissect_scene(LocalScene& scene);
    const std::map<std::string, EntityId>& dissected_ids() const { return name_to_id_; }

    void on_join_ack(const wire::JoinAck& ack);
    void on_snapshot(const wire::Snapshot& snap, double now);
    void on_group_update(const wire::GroupedUpdate& msg, double now);
    void on_softbody_particles(const wire::SoftbodyParticlesMsg& msg);
    void on_collision_event(const CollisionEvent& ev);
    void on_destroy(std::span<const EntityId> ids);

    std::optional<Transform> sample_render_transform(EntityId id, double now) const;
    const std::vector<Vec3>* softbody_particles(EntityId id) const;

    // Per-frame grab input for one hand (0 = left, 1 = right). Emits GrabStart
    // on the press edge, MoveToTransform while held, GrabEnd on release.
    std::vector<OutCommand> update_hand(int hand, const Transform& hand_pose, bool grab_button);
    // Per-frame avatar targets; all three entities are driven every call.
    std::vector<OutCommand> drive_avatar(const Transform& head, const Transform& left, const Transform& right);

    void subscribe_collision(std::function<void(const CollisionEvent&)> callback);

    bool joined() const { return player_ != kWorldOwner; }
    PlayerId player() const { return player_; }
    const wire::JoinAck& avatar() const { return avatar_; }
    EntityId hovered(int hand) const;

    const GraphicsObject* gro(EntityId id) const;
    const std::map<EntityId, GraphicsObject>& registry() const { return registry_; }
    std::uint64_t unknown_records() const { return unknown_records_; }
    std::uint64_t stale_updates() const { return stale_updates_; }

private:
    struct Interactor {
        EntityId hand = kNoEntity;
        bool button = false;
        bool interacting = false;
        EntityId target = kNoEntity;
        Transform grip_offset{}; // target pose in hand space, fixed at grab time
        std::vector<EntityId> hover_stack;
    };

    GraphicsObject& ensure_gro(EntityId id);
    void push_state(EntityId id, std::uint32_t tick, const Transform& t, double now, bool reset);
    Transform latest_transform(EntityId id) const;

    GhostConfig cfg_;
    std::map<std::string, EntityId> name_to_id_;
    std::map<EntityId, GraphicsObject> registry_;
    std::map<EntityId, std::vector<Vec3>> softbody_particles_;
    std::map<EntityId, std::uint32_t> softbody_ticks_;
    std::vector<std::function<void(const CollisionEvent&)>> collision_subscribers_;

    PlayerId player_ = kWorldOwner;
    wire::JoinAck avatar_{};
    Interactor hands_[2];

    std::uint64_t unknown_records_ = 0;
    std::uint64_t stale_updates_ = 0;
};

} // namespace physlink::client
