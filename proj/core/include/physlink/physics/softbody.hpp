#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "physlink/math.hpp"

namespace physlink::phys {

struct SoftParticle {
    Vec3 position{};
    Vec3 velocity{};
    float mass = 1.0f;
};

struct SoftSpring {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    float rest_length = 0;
    float stiffness = 0;
    float damping = 0;
};

struct VertexBinding {
    std::uint32_t particle = 0;
    Vec3 offset{}; // vertex position relative to the particle, fixed at build time
};

struct SoftBody {
    std::vector<SoftParticle> particles;
    std::vector<SoftSpring> springs; // each unordered pair appears once, i < j
    std::vector<VertexBinding> bindings; // one per input vertex, same order
};

// Greedy clustering in vertex-index order: the first uncovered vertex seeds a
// particle placed at the centroid of every vertex within particle_radius of
// it; those vertices bind to the particle with fixed offsets. Particle pairs
// closer than spring_cutoff get a spring at their build-time distance.
SoftBody build_softbody(std::span<const Vec3> vertices,
                        float particle_radius,
                        float spring_cutoff,
                        float stiffness,
                        float damping);

// Translation-only skinning: vertex = bound particle position + offset.
std::vector<Vec3> skin_vertices(const SoftBody& body);

float kinetic_energy(const SoftBody& body);

} // namespace physlink::phys
