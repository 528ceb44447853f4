#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <utility>
#include <vector>

namespace physlink::transport {

using EndpointId = std::uint32_t;

// Deterministic in-process datagram network. Time never advances on its own;
// callers push it forward with advance(). Latency, jitter and loss are applied
// per send from a seeded generator, so a given seed replays exactly.
class SimulatedNetwork {
public:
    struct LinkParams {
        double latency = 0.0;      // seconds, one way
        double jitter = 0.0;       // uniform in [0, jitter) added per datagram
        double loss = 0.0;         // probability a datagram vanishes
    };

    explicit SimulatedNetwork(std::uint64_t seed = 0) : rng_(seed) {}

    EndpointId create_endpoint();
    void set_link(LinkParams params) { params_ = params; }
    const LinkParams& link() const { return params_; }

    // Directional override for one endpoint pair; unset pairs use the default.
    void set_link(EndpointId from, EndpointId to, LinkParams params) { overrides_[{from, to}] = params; }
    const LinkParams& link_between(EndpointId from, EndpointId to) const {
        auto it = overrides_.find({from, to});
        return it == overrides_.end() ? params_ : it->second;
    }

    // Queues a datagram for delivery at now + latency + jitter, or drops it.
    // Oversized datagrams (beyond kMaxDatagram) throw std::length_error.
    void send(EndpointId from, EndpointId to, std::vector<std::uint8_t> payload);

    void advance(double dt) { now_ += dt; }
    double now() const { return now_; }

    struct Datagram {
        EndpointId from = 0;
        double delivered_at = 0; // exact simulated delivery time, ≤ now()
        std::vector<std::uint8_t> payload;
    };

    // Pops the next datagram whose delivery time has arrived, oldest first.
    std::optional<Datagram> receive(EndpointId at);

    std::uint64_t datagrams_sent() const { return sent_; }
    std::uint64_t datagrams_dropped() const { return dropped_; }

    static constexpr std::size_t kMaxDatagram = 65507;

private:
    struct Queued {
        double deliver_at = 0;
        std::uint64_t order = 0; // ties broken by send order
        EndpointId from = 0;
        std::vector<std::uint8_t> payload;
        bool operator>(const Queued& o) const {
            if (deliver_at != o.deliver_at) return deliver_at > o.deliver_at;
            return order > o.order;
        }
    };
    using Heap = std::priority_queue<Queued, std::vector<Queued>, std::greater<>>;

    double now_ = 0;
    EndpointId next_id_ = 1;
    LinkParams params_{};
    std::map<std::pair<EndpointId, EndpointId>, LinkParams> overrides_;
    std::map<EndpointId, Heap> inboxes_;
    std::mt19937_64 rng_;
    std::uint64_t order_ = 0;
    std::uint64_t sent_ = 0;
    std::uint64_t dropped_ = 0;
};

} // namespace physlink::transport
