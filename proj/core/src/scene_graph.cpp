#include "physlink/scene_graph.hpp"

#include <algorithm>

namespace physlink {

void SceneGraph::add_node(EntityId id, EntityId parent, const Transform& local) {
    if (id == kNoEntity) throw SceneGraphError("entity id 0 is reserved");
    if (contains(id)) throw SceneGraphError("duplicate entity id " + std::to_string(id));
    if (parent != kNoEntity && !contains(parent))
        throw SceneGraphError("unknown parent " + std::to_string(parent) + " for entity " + std::to_string(id));

    SceneNode n;
    n.parent = parent;
    n.local = local;
    nodes_.emplace(id, std::move(n));
    if (parent == kNoEntity)
        roots_.push_back(id);
    else
        nodes_[parent].children.push_back(id);
}

void SceneGraph::remove_node(EntityId id) {
    const SceneNode n = node(id);
    auto detach = [&](std::vector<EntityId>& list) {
        list.erase(std::remove(list.begin(), list.end(), id), list.end());
    };
    if (n.parent == kNoEntity)
        detach(roots_);
    else
        detach(nodes_[n.parent].children);

    for (EntityId child : n.children) {
        nodes_[child].parent = n.parent;
        if (n.parent == kNoEntity)
            roots_.push_back(child);
        else
            nodes_[n.parent].children.push_back(child);
    }
    nodes_.erase(id);
}

void SceneGraph::reparent(EntityId id, EntityId new_parent) {
    SceneNode& n = node(id);
    if (new_parent != kNoEntity) {
        if (!contains(new_parent)) throw SceneGraphError("unknown parent " + std::to_string(new_parent));
        if (new_parent == id || is_ancestor(id, new_parent))
            throw SceneGraphError("reparenting would create a cycle");
    }
    auto detach = [&](std::vector<EntityId>& list) {
        list.erase(std::remove(list.begin(), list.end(), id), list.end());
    };
    if (n.parent == kNoEntity)
        detach(roots_);
    else
        detach(nodes_[n.parent].children);

    n.parent = new_parent;
    if (new_parent == kNoEntity)
        roots_.push_back(id);
    else
        nodes_[new_parent].children.push_back(id);
}

const SceneNode& SceneGraph::node(EntityId id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw SceneGraphError("unknown entity " + std::to_string(id));
    return it->second;
}

SceneNode& SceneGraph::node(EntityId id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw SceneGraphError("unknown entity " + std::to_string(id));
    return it->second;
}

Transform SceneGraph::compose_world_transform(EntityId id) const {
    const SceneNode* n = &node(id);
    Transform world = n->local;
    while (n->parent != kNoEntity) {
        n = &node(n->parent);
        world = compose(n->local, world);
    }
    return world;
}

std::vector<EntityId> SceneGraph::traversal_order() const {
    std::vector<EntityId> order;
    order.reserve(nodes_.size());
    std::vector<EntityId> stack(roots_.rbegin(), roots_.rend());
    while (!stack.empty()) {
        const EntityId id = stack.back();
        stack.pop_back();
        order.push_back(id);
        const auto& children = nodes_.at(id).children;
        for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back(*it);
    }
    return order;
}

bool SceneGraph::is_ancestor(EntityId maybe_ancestor, EntityId id) const {
    EntityId cur = node(id).parent;
    while (cur != kNoEntity) {
        if (cur == maybe_ancestor) return true;
        cur = node(cur).parent;
    }
    return false;
}

} // namespace physlink
