#include "physlink/client/client_host.hpp"

namespace physlink::client {

void ClientHost::start_session(LocalScene& scene, double now) {
    const auto batch = ghost_.dissect_scene(scene);
    conn_.send_reliable(wire::encode_pcc_batch(batch), now);
    conn_.send_reliable(wire::encode_join(), now);
    flush();
}

void ClientHost::join(double now) {
    conn_.send_reliable(wire::encode_join(), now);
    flush();
}

void ClientHost::on_datagram(std::span<const std::uint8_t> datagram, double now) {
    bytes_in_ += datagram.size();
    conn_.on_datagram(datagram, now);
    for (const auto& payload : conn_.poll()) dispatch(payload, now);
    flush();
}

void ClientHost::dispatch(std::span<const std::uint8_t> payload, double now) {
    using wire::MsgType;
    switch (wire::peek_type(payload)) {
    case MsgType::JoinAck:
        ghost_.on_join_ack(wire::decode_join_ack(payload));
        break;
    case MsgType::Snapshot:
        ghost_.on_snapshot(wire::decode_snapshot(payload), now);
        break;
    case MsgType::GroupedUpdate: {
        const auto msg = wire::decode_group(payload);
        last_update_tick_ = std::max(last_update_tick_, msg.tick);
        updates_received_ += 1;
        ghost_.on_group_update(msg, now);
        break;
    }
    case MsgType::CollisionEvt:
        ghost_.on_collision_event(wire::decode_collision_event(payload));
        break;
    case MsgType::DestroyEntity: {
        const auto ids = wire::decode_destroy(payload);
        ghost_.on_destroy(ids);
        break;
    }
    case MsgType::SoftbodyParticles:
        ghost_.on_softbody_particles(wire::decode_softbody_particles(payload));
        break;
    default:
        break;
    }
}

void ClientHost::send_commands(std::span<const OutCommand> commands, double now) {
    for (const OutCommand& cmd : commands) {
        switch (cmd.kind) {
        case OutCommand::Kind::GrabStart:
            conn_.send_reliable(wire::encode_grab(wire::MsgType::GrabStart, {ghost_.player(), cmd.entity}), now);
            break;
        case OutCommand::Kind::GrabEnd:
            conn_.send_reliable(wire::encode_grab(wire::MsgType::GrabEnd, {ghost_.player(), cmd.entity}), now);
            break;
        case OutCommand::Kind::MoveTo:
            conn_.send_unreliable(wire::encode_move_to({ghost_.player(), cmd.entity, cmd.target}));
            break;
        }
    }
    flush();
}

void ClientHost::update(double now) {
    conn_.update(now);
    flush();
}

void ClientHost::flush() {
    for (auto& dg : conn_.out()) send_(std::move(dg));
}

} // namespace physlink::client
