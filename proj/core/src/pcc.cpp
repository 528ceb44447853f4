#include "physlink/pcc.hpp"

namespace physlink {

std::vector<std::string> validate_pcc(const Pcc& pcc) {
    std::vector<std::string> violations;
    auto add = [&](std::string msg) { violations.push_back(std::move(msg)); };

    if (pcc.entity_id == kNoEntity) add("entity_id must be nonzero");
    if (pcc.parent_id == pcc.entity_id && pcc.entity_id != kNoEntity) add("entity cannot be its own parent");

    if (pcc.transform_only) {
        if (pcc.body) add("transform_only container carries a body");
        if (pcc.collider) add("transform_only container carries a collider");
        if (!pcc.springs.empty()) add("transform_only container carries springs");
    } else if (!pcc.body && !pcc.collider && pcc.springs.empty()) {
        add("container has no physics payload and is not transform_only");
    }

    if (pcc.body) {
        if (!pcc.body->kinematic && pcc.body->mass <= 0.0f) add("dynamic body requires mass > 0");
        if (pcc.body->restitution < 0.0f || pcc.body->restitution > 1.0f) add("restitution must be in [0,1]");
        if (pcc.body->linear_damping < 0.0f) add("linear_damping must be >= 0");
    }
    if (pcc.collider) {
        if (const auto* s = std::get_if<SphereShape>(&pcc.collider->shape)) {
            if (s->radius <= 0.0f) add("sphere radius must be > 0");
        } else if (const auto* b = std::get_if<BoxShape>(&pcc.collider->shape)) {
            if (b->half_extents.x <= 0.0f || b->half_extents.y <= 0.0f || b->half_extents.z <= 0.0f)
                add("box half extents must be > 0");
        }
    }
    for (const SpringSpec& s : pcc.springs) {
        if (s.other == kNoEntity) add("spring endpoint must be a valid entity");
        if (s.other == pcc.entity_id) add("spring cannot connect an entity to itself");
        if (s.rest_length < 0.0f) add("spring rest_length must be >= 0");
        if (s.stiffness < 0.0f) add("spring stiffness must be >= 0");
        if (s.damping < 0.0f) add("spring damping must be >= 0");
    }

    const float rot_norm = norm(pcc.transform.rotation);
    if (rot_norm < 1.0f - 1e-5f || rot_norm > 1.0f + 1e-5f) add("transform rotation must be unit length");

    return violations;
}

} // namespace physlink
