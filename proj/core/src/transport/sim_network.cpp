#include "physlink/transport/sim_network.hpp"

#include <stdexcept>

namespace physlink::transport {

EndpointId SimulatedNetwork::create_endpoint() {
    const EndpointId id = next_id_++;
    inboxes_.emplace(id, Heap{});
    return id;
}

void SimulatedNetwork::send(EndpointId from, EndpointId to, std::vector<std::uint8_t> payload) {
    if (payload.size() > kMaxDatagram) throw std::length_error("datagram exceeds 65507 bytes");
    auto it = inboxes_.find(to);
    if (it == inboxes_.end()) {
        ++dropped_;
        return;
    }
    ++sent_;
    const LinkParams& link = link_between(from, to);
    // Draw loss and jitter unconditionally so the random stream, and with it
    // every later draw, does not depend on which packets happened to survive.
    const double roll = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    const double jit = link.jitter > 0
        ? std::uniform_real_distribution<double>(0.0, link.jitter)(rng_)
        : 0.0;
    if (link.loss > 0 && roll < link.loss) {
        ++dropped_;
        return;
    }
    Queued q;
    q.deliver_at = now_ + link.latency + jit;
    q.order = order_++;
    q.from = from;
    q.payload = std::move(payload);
    it->second.push(std::move(q));
}

std::optional<SimulatedNetwork::Datagram> SimulatedNetwork::receive(EndpointId at) {
    auto it = inboxes_.find(at);
    if (it == inboxes_.end()) return std::nullopt;
    Heap& heap = it->second;
    if (heap.empty() || heap.top().deliver_at > now_) return std::nullopt;
    Datagram d{heap.top().from, heap.top().deliver_at, std::move(const_cast<Queued&>(heap.top()).payload)};
    heap.pop();
    return d;
}

} // namespace physlink::transport
