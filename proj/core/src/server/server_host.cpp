#include "physlink/server/server_host.hpp"

#include <chrono>

namespace physlink::server {

int ServerHost::add_connection() {
    const int id = next_conn_++;
    clients_.emplace(id, Client{});
    return id;
}

void ServerHost::remove_connection(int conn, double now) {
    auto it = clients_.find(conn);
    if (it == clients_.end()) return;
    if (it->second.player != kWorldOwner) {
        const auto destroyed = session_.leave(it->second.player);
        if (!destroyed.empty()) {
            const auto payload = wire::encode_destroy(destroyed);
            for (auto& [cid, c] : clients_) {
                if (cid == conn || c.player == kWorldOwner) continue;
                c.conn.send_reliable(payload, now);
            }
        }
    }
    clients_.erase(it);
    std::erase(queued_joins_, conn);
    flush(now);
}

void ServerHost::on_datagram(int conn, std::span<const std::uint8_t> datagram, double now) {
    auto it = clients_.find(conn);
    if (it == clients_.end()) return;
    it->second.conn.on_datagram(datagram, now);
    for (const auto& payload : it->second.conn.poll()) dispatch(conn, it->second, payload, now);
    flush(now);
}

void ServerHost::dispatch(int conn, Client& c, std::span<const std::uint8_t> payload, double now) {
    using wire::MsgType;
    switch (wire::peek_type(payload)) {
    case MsgType::PccBatch: {
        if (session_.initialized()) {
            ++protocol_errors_;
            return;
        }
        session_.initialize_from_batch(wire::decode_pcc_batch(payload));
        const auto queued = queued_joins_;
        queued_joins_.clear();
        for (int qconn : queued) {
            auto qit = clients_.find(qconn);
            if (qit != clients_.end()) do_join(qconn, qit->second, now);
        }
        break;
    }
    case MsgType::Join:
        if (!session_.initialized()) queued_joins_.push_back(conn);
        else do_join(conn, c, now);
        break;
    case MsgType::MoveToTransform: {
        const auto msg = wire::decode_move_to(payload);
        session_.move_to_transform(c.player, msg.entity, msg.target);
        break;
    }
    case MsgType::GrabStart: {
        const auto msg = wire::decode_grab(payload);
        session_.grab(c.player, msg.entity);
        break;
    }
    case MsgType::GrabEnd: {
        const auto msg = wire::decode_grab(payload);
        session_.release(c.player, msg.entity);
        break;
    }
    default:
        ++protocol_errors_;
        break;
    }
}

void ServerHost::do_join(int conn, Client& c, double now) {
    const PlayerId player = session_.join();
    c.player = player;
    const AvatarIds ids = session_.avatar_of(player);
    c.conn.send_reliable(wire::encode_join_ack({player, ids.head, ids.left_hand, ids.right_hand}), now);
    for (auto& chunk : wire::encode_snapshot_chunks(session_.snapshot(), cfg_.max_payload))
        c.conn.send_reliable(std::move(chunk), now);

    // Everyone already in the session learns the newcomer's avatar; without
    // this their update records would be dropped as unknown entities.
    wire::Snapshot announce;
    announce.tick = session_.world().tick();
    for (EntityId id : {ids.head, ids.left_hand, ids.right_hand}) {
        const phys::Entity& e = session_.world().entity(id);
        std::uint8_t flags = 0;
        if (e.body && e.body->kinematic) flags |= wire::kSnapKinematic;
        announce.entities.push_back({id, player, flags, e.pose});
    }
    const auto chunks = wire::encode_snapshot_chunks(announce, cfg_.max_payload);
    for (auto& [cid, other] : clients_) {
        if (cid == conn || other.player == kWorldOwner) continue;
        for (const auto& chunk : chunks) other.conn.send_reliable(chunk, now);
    }
}

void ServerHost::spawn_containers(std::span<const Pcc> pccs, double now) {
    wire::Snapshot announce;
    announce.tick = session_.world().tick();
    for (const Pcc& pcc : pccs) {
        session_.spawn_container(pcc);
        const phys::Entity& e = session_.world().entity(pcc.entity_id);
        std::uint8_t flags = 0;
        if (e.interactable) flags |= wire::kSnapInteractable;
        if (e.body && e.body->kinematic) flags |= wire::kSnapKinematic;
        announce.entities.push_back({pcc.entity_id, e.owner, flags, e.pose});
    }
    auto chunks = wire::encode_snapshot_chunks(announce, cfg_.max_payload);
    for (auto& [cid, c] : clients_) {
        if (c.player == kWorldOwner) continue;
        for (const auto& chunk : chunks) c.conn.send_reliable(chunk, now);
    }
    flush(now);
}

void ServerHost::run_tick(double tick_time) {
    const auto started = std::chrono::steady_clock::now();
    const TickOutput out = session_.tick();
    const double step_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();

    const auto groups = wire::encode_group(out.records, out.tick, cfg_.max_payload);
    std::vector<std::vector<std::uint8_t>> event_payloads;
    event_payloads.reserve(out.events.size());
    for (const CollisionEvent& ev : out.events) event_payloads.push_back(wire::encode_collision_event(ev));
    std::vector<std::vector<std::uint8_t>> soft_payloads;
    soft_payloads.reserve(out.softbodies.size());
    for (const auto& msg : out.softbodies) soft_payloads.push_back(wire::encode_softbody_particles(msg));

    const double release = tick_time + cfg_.virtual_step_cost;
    std::uint64_t tick_bytes = 0;
    for (auto& [cid, c] : clients_) {
        if (c.player == kWorldOwner) continue;
        for (const auto& g : groups) c.conn.send_unreliable(g);
        for (const auto& e : event_payloads) c.conn.send_reliable(e, tick_time);
        for (const auto& s : soft_payloads) c.conn.send_unreliable(s);
        for (auto& dg : c.conn.out()) {
            tick_bytes += dg.size();
            pending_.push_back({release, cid, std::move(dg)});
        }
    }

    TickMetrics m;
    m.tick = out.tick;
    m.step_ms = step_ms;
    m.entities = session_.world().entity_count();
    m.records_sent = out.records.size();
    m.events_out = out.events.size();
    m.bytes_out = tick_bytes;
    metrics_.push_back(m);
}

void ServerHost::update(double now) {
    if (first_update_) {
        next_tick_time_ = now + session_.config().world.dt;
        first_update_ = false;
    }
    for (auto& [cid, c] : clients_) c.conn.update(now);
    if (session_.initialized()) {
        while (now >= next_tick_time_) {
            run_tick(next_tick_time_);
            next_tick_time_ += session_.config().world.dt;
        }
    } else {
        next_tick_time_ = now + session_.config().world.dt;
    }
    flush(now);
}

void ServerHost::flush(double now) {
    for (auto& [cid, c] : clients_)
        for (auto& dg : c.conn.out()) pending_.push_back({now, cid, std::move(dg)});
    std::deque<Pending> held;
    while (!pending_.empty()) {
        Pending p = std::move(pending_.front());
        pending_.pop_front();
        if (p.release_at > now) {
            held.push_back(std::move(p));
            continue;
        }
        bytes_out_ += p.datagram.size();
        bytes_per_conn_[p.conn] += p.datagram.size();
        send_(p.conn, std::move(p.datagram));
    }
    pending_ = std::move(held);
}

std::uint64_t ServerHost::bytes_to(int conn) const {
    auto it = bytes_per_conn_.find(conn);
    return it == bytes_per_conn_.end() ? 0 : it->second;
}

} // namespace physlink::server
