#include "physlink/physics/softbody.hpp"

#include <stdexcept>

namespace physlink::phys {

SoftBody build_softbody(std::span<const Vec3> vertices,
                        float particle_radius,
                        float spring_cutoff,
                        float stiffness,
                        float damping) {
    if (vertices.empty()) throw std::invalid_argument("softbody needs at least one vertex");
    if (particle_radius <= 0 || spring_cutoff <= 0) throw std::invalid_argument("softbody radii must be positive");

    SoftBody body;
    body.bindings.resize(vertices.size());
    std::vector<bool> covered(vertices.size(), false);
    const float r2 = particle_radius * particle_radius;

    for (std::size_t seed = 0; seed < vertices.size(); ++seed) {
        if (covered[seed]) continue;
        std::vector<std::size_t> members;
        Vec3 centroid{};
        for (std::size_t v = seed; v < vertices.size(); ++v) {
            if (covered[v]) continue;
            if (length_sq(vertices[v] - vertices[seed]) <= r2) {
                members.push_back(v);
                centroid += vertices[v];
            }
        }
        centroid = centroid / static_cast<float>(members.size());
        const auto pidx = static_cast<std::uint32_t>(body.particles.size());
        body.particles.push_back({centroid, {}, 1.0f});
        for (std::size_t v : members) {
            covered[v] = true;
            body.bindings[v] = {pidx, vertices[v] - centroid};
        }
    }

    const float c2 = spring_cutoff * spring_cutoff;
    for (std::uint32_t i = 0; i + 1 < body.particles.size(); ++i) {
        for (std::uint32_t j = i + 1; j < body.particles.size(); ++j) {
            const float d2 = length_sq(body.particles[j].position - body.particles[i].position);
            if (d2 < c2)
                body.springs.push_back({i, j, std::sqrt(d2), stiffness, damping});
        }
    }
    return body;
}

std::vector<Vec3> skin_vertices(const SoftBody& body) {
    std::vector<Vec3> out;
    out.reserve(body.bindings.size());
    for (const VertexBinding& b : body.bindings)
        out.push_back(body.particles[b.particle].position + b.offset);
    return out;
}

float kinetic_energy(const SoftBody& body) {
    float e = 0;
    for (const SoftParticle& p : body.particles)
        e += 0.5f * p.mass * length_sq(p.velocity);
    return e;
}

} // namespace physlink::phys
