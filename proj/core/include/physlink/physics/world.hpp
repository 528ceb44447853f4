#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "physlink/events.hpp"
#include "physlink/pcc.hpp"
#include "physlink/physics/softbody.hpp"
#include "physlink/transform.hpp"

namespace physlink::phys {

struct WorldConfig {
    Vec3 gravity{0.0f, -9.81f, 0.0f};
    float dt = 0.02f;
    float max_speed = 100.0f;
    float drive_kp = 30.0f;       // proportional gain of the move drive, 1/s
    float drive_v_max = 3.0f;     // speed cap of the move drive, m/s
    float contact_slop = 0.005f;  // tolerated penetration, m
    float baumgarte = 0.2f;       // fraction of excess penetration corrected per step
    float grid_cell = 1.0f;       // broadphase cell edge, m
};

struct Body {
    Vec3 velocity{};
    float mass = 1.0f;
    float inv_mass = 1.0f;
    bool kinematic = false;
    float linear_damping = 0.0f;
    float restitution = 0.0f;
    std::optional<Transform> move_target;
};

struct Entity {
    Transform pose{};
    std::optional<Body> body;
    std::vector<ColliderSpec> colliders; // at most one from a container; avatars add extras
    std::optional<SoftBody> soft;
    bool interactable = false;
    bool transform_only = false;
    PlayerId owner = kWorldOwner;
};

struct Spring {
    EntityId a = kNoEntity;
    EntityId b = kNoEntity;
    float rest_length = 0;
    float stiffness = 0;
    float damping = 0;
};

class PhysicsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Authoritative simulation state. Iteration everywhere is by ascending
// EntityId so identical inputs give bit-identical states.
class World {
public:
    explicit World(WorldConfig cfg = {}) : cfg_(cfg) {}

    const WorldConfig& config() const { return cfg_; }

    void spawn(EntityId id, const Transform& pose);
    void spawn_from_container(const Pcc& pcc); // springs excluded; wire those after the batch
    void attach_body(EntityId id, const BodySpec& spec);
    void attach_collider(EntityId id, const ColliderSpec& spec);
    void attach_softbody(EntityId id, SoftBody body);
    void add_spring(EntityId a, EntityId b, float rest_length, float stiffness, float damping);

    // Removes the entity, its springs, and its contact pairs; returns the Exit
    // events owed for contacts that were active.
    std::vector<CollisionEvent> destroy(EntityId id);

    bool contains(EntityId id) const { return entities_.count(id) != 0; }
    const Entity& entity(EntityId id) const;
    Entity& entity_mut(EntityId id);
    const std::map<EntityId, Entity>& entities() const { return entities_; }
    std::size_t entity_count() const { return entities_.size(); }

    const Transform& transform_of(EntityId id) const { return entity(id).pose; }
    void teleport(EntityId id, const Transform& pose);

    // Dynamic bodies store the target and get velocity-driven toward it each
    // step; kinematic bodies teleport immediately.
    void apply_move_to_transform(EntityId id, const Transform& target);
    void clear_move_target(EntityId id);

    bool in_contact(EntityId a, EntityId b) const;

    std::vector<CollisionEvent> step();
    std::uint32_t tick() const { return tick_; }

private:
    struct Contact {
        EntityId a = kNoEntity;
        EntityId b = kNoEntity;
        Vec3 normal{};      // unit, pointing a -> b
        float penetration = 0;
        bool solid = false; // neither collider is a trigger
    };

    void integrate_velocities();
    void apply_spring_forces();
    void detect_contacts(std::vector<Contact>& out) const;
    void resolve_impulses(const std::vector<Contact>& contacts);
    void integrate_positions();
    void correct_penetration(const std::vector<Contact>& contacts);
    void step_softbodies();
    void collide_particles();
    void emit_events(const std::vector<Contact>& contacts, std::vector<CollisionEvent>& out);
    void assert_finite() const;

    WorldConfig cfg_{};
    std::uint32_t tick_ = 0;
    std::map<EntityId, Entity> entities_;
    std::vector<Spring> springs_; // kept sorted by (a, b), unique
    std::set<std::pair<EntityId, EntityId>> contact_pairs_;
};

} // namespace physlink::phys
