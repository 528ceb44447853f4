#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "physlink/ids.hpp"
#include "physlink/transform.hpp"

namespace physlink {

struct SceneNode {
    EntityId parent = kNoEntity; // kNoEntity = root
    Transform local{};
    std::vector<EntityId> children; // in insertion order
};

class SceneGraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Hierarchy of entities. Acyclic by construction: a node can only be added
// under an existing parent, and reparenting onto a descendant is rejected.
class SceneGraph {
public:
    void add_node(EntityId id, EntityId parent, const Transform& local);
    void remove_node(EntityId id); // children are promoted to the node's parent
    void reparent(EntityId id, EntityId new_parent);

    bool contains(EntityId id) const { return nodes_.count(id) != 0; }
    const SceneNode& node(EntityId id) const;
    SceneNode& node(EntityId id);
    std::size_t size() const { return nodes_.size(); }

    void set_local(EntityId id, const Transform& t) { node(id).local = t; }

    // Parent-chain composition, root-first. Throws SceneGraphError on unknown id.
    Transform compose_world_transform(EntityId id) const;

    // Roots first, then children in insertion order (depth first).
    std::vector<EntityId> traversal_order() const;

    const std::map<EntityId, SceneNode>& nodes() const { return nodes_; }

private:
    bool is_ancestor(EntityId maybe_ancestor, EntityId id) const;

    std::map<EntityId, SceneNode> nodes_;
    std::vector<EntityId> roots_; // in insertion order
};

} // namespace physlink
