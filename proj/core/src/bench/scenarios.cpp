#include "physlink/bench/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "physlink/client/client_host.hpp"
#include "physlink/physics/softbody.hpp"
#include "physlink/server/relay.hpp"
#include "physlink/server/server_host.hpp"

namespace physlink::bench {

double reference_throughput_mbit(int objects) {
    switch (objects) {
    case 500: return 0.72;
    case 1000: return 1.32;
    case 2000: return 2.70;
    case 5000: return 5.45;
    case 7500: return 8.31;
    case 10000: return 10.95;
    default: return 0.0;
    }
}

double reference_softbody_mbit(int particles) {
    switch (particles) {
    case 500: return 0.46;
    case 1500: return 1.40;
    default: return 0.0;
    }
}

double reference_relay_kb(int objects) {
    switch (objects) {
    case 32: return 12.56;
    case 64: return 24.86;
    case 128: return 49.50;
    case 256: return 96.80;
    case 512: return 193.60;
    default: return 0.0;
    }
}

double reference_relay_alt_kb(int objects) {
    switch (objects) {
    case 32: return 16.52;
    case 64: return 32.58;
    case 128: return 63.00;
    case 256: return 130.50;
    case 512: return 257.40;
    default: return 0.0;
    }
}

namespace {

client::LocalEntity ground_entity(const char* name, Vec3 center, Vec3 half) {
    client::LocalEntity g;
    g.name = name;
    g.local.position = center;
    g.collider = ColliderSpec{BoxShape{half}, false};
    return g;
}

Pcc prop_pcc(EntityId id, const Transform& pose, const Shape& shape, float mass, float restitution,
             float damping, bool interactable, PlayerId owner) {
    Pcc p;
    p.entity_id = id;
    p.transform = pose;
    p.interactable = interactable;
    p.owner = owner;
    p.body = BodySpec{mass, false, damping, restitution};
    p.collider = ColliderSpec{shape, false};
    return p;
}

// True when the datagram is an unreliable payload of the given type.
bool unreliable_of_type(const std::vector<std::uint8_t>& dg, wire::MsgType type) {
    return dg.size() > wire::kEnvelopeOverhead && dg[0] == static_cast<std::uint8_t>(wire::Channel::Unreliable) &&
           dg[wire::kEnvelopeOverhead] == static_cast<std::uint8_t>(type);
}

} // namespace

MultiObjectReport run_multiobject(const MultiObjectConfig& cfg) {
    transport::SimulatedNetwork net(cfg.seed);
    net.set_link(cfg.link);
    const auto ep_server = net.create_endpoint();
    const auto ep_client = net.create_endpoint();

    server::ServerHost server({}, [&](int, std::vector<std::uint8_t> dg) {
        net.send(ep_server, ep_client, std::move(dg));
    });
    const int conn = server.add_connection();

    std::uint64_t client_updates = 0;
    client::ClientHost viewer({}, [&](std::vector<std::uint8_t> dg) {
        net.send(ep_client, ep_server, std::move(dg));
    });

    client::LocalScene scene;
    scene.entities.push_back(ground_entity("ground", {0, -0.5f, 0}, {160, 0.5f, 160}));
    viewer.start_session(scene, net.now());

    constexpr double kStep = 0.002;
    const auto pump = [&] {
        net.advance(kStep);
        while (auto d = net.receive(ep_server)) server.on_datagram(conn, d->payload, d->delivered_at);
        while (auto d = net.receive(ep_client)) {
            if (unreliable_of_type(d->payload, wire::MsgType::GroupedUpdate)) ++client_updates;
            viewer.on_datagram(d->payload, d->delivered_at);
        }
        server.update(net.now());
        viewer.update(net.now());
    };

    while (!viewer.ghost().joined() && net.now() < 5.0) pump();

    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.objects))));
    std::vector<Pcc> props;
    props.reserve(cfg.objects);
    for (int i = 0; i < cfg.objects; ++i) {
        const EntityId id = server.session().reserve_entity_id();
        const float x = (static_cast<float>(i % side) - side / 2.0f) * 3.0f;
        const float z = (static_cast<float>(i / side) - side / 2.0f) * 3.0f;
        const float y = 35.0f + 2.5f * static_cast<float>((static_cast<std::uint32_t>(i) * 2654435761u >> 8) % 64);
        const Shape shape = (i % 2) ? Shape{SphereShape{0.3f}} : Shape{BoxShape{{0.25f, 0.25f, 0.25f}}};
        props.push_back(prop_pcc(id, {{x, y, z}, Quat::identity()}, shape, 1.0f, 0.2f, 0.05f, false, kWorldOwner));
    }
    server.spawn_containers(props, net.now());

    const double t0 = net.now();
    const std::size_t tick_base = server.metrics().size();
    std::uint64_t srv_mark0 = 0, srv_mark1 = 0, cli_mark0 = 0, cli_mark1 = 0;
    std::uint64_t upd_mark0 = 0, upd_mark1 = 0;
    bool mark0 = false, mark1 = false;

    while (net.now() < t0 + cfg.duration) {
        pump();
        const double t = net.now() - t0;
        if (!mark0 && t >= cfg.measure_from) {
            srv_mark0 = server.bytes_to(conn);
            cli_mark0 = viewer.bytes_in();
            upd_mark0 = client_updates;
            mark0 = true;
        }
        if (!mark1 && t >= cfg.measure_to) {
            srv_mark1 = server.bytes_to(conn);
            cli_mark1 = viewer.bytes_in();
            upd_mark1 = client_updates;
            mark1 = true;
        }
    }
    if (!mark1) {
        srv_mark1 = server.bytes_to(conn);
        cli_mark1 = viewer.bytes_in();
        upd_mark1 = client_updates;
    }

    MultiObjectReport rep;
    rep.objects = cfg.objects;
    const double window = cfg.measure_to - cfg.measure_from;
    rep.outbound_mbit_s = static_cast<double>(srv_mark1 - srv_mark0) * 8.0 / 1e6 / window;
    rep.client_bytes_s = static_cast<double>(cli_mark1 - cli_mark0) / window;
    rep.updates_s = static_cast<double>(upd_mark1 - upd_mark0) / window;
    rep.unknown_records = viewer.ghost().unknown_records();
    rep.reference_mbit_s = reference_throughput_mbit(cfg.objects);

    double sum = 0, peak = 0;
    std::size_t ticks = 0;
    for (std::size_t i = tick_base; i < server.metrics().size(); ++i) {
        const auto& m = server.metrics()[i];
        sum += m.step_ms;
        peak = std::max(peak, m.step_ms);
        rep.records_sent += m.records_sent;
        ++ticks;
    }
    rep.mean_step_ms = ticks ? sum / static_cast<double>(ticks) : 0.0;
    rep.max_step_ms = peak;
    return rep;
}

namespace {

std::vector<Vec3> fibonacci_shell(int count, float radius, Vec3 center) {
    std::vector<Vec3> pts;
    pts.reserve(count);
    const float golden = std::numbers::pi_v<float> * (3.0f - std::sqrt(5.0f));
    for (int i = 0; i < count; ++i) {
        const float y = 1.0f - 2.0f * (static_cast<float>(i) + 0.5f) / static_cast<float>(count);
        const float r = std::sqrt(std::max(0.0f, 1.0f - y * y));
        const float a = golden * static_cast<float>(i);
        pts.push_back(center + Vec3{r * std::cos(a), y, r * std::sin(a)} * radius);
    }
    return pts;
}

// Larger cluster radius swallows more vertices and yields fewer particles;
// bisect until the count lands within 10% of the target.
phys::SoftBody build_shell_softbody(int target_particles, Vec3 center, float stiffness, float damping) {
    const auto vertices = fibonacci_shell(target_particles * 4, 1.0f, center);
    float lo = 0.01f, hi = 0.8f;
    float radius = 4.0f / std::sqrt(static_cast<float>(vertices.size()));
    phys::SoftBody best;
    int best_err = -1;
    for (int iter = 0; iter < 24; ++iter) {
        auto body = phys::build_softbody(vertices, radius, radius * 2.6f, stiffness, damping);
        const int count = static_cast<int>(body.particles.size());
        const int err = std::abs(count - target_particles);
        if (best_err < 0 || err < best_err) {
            best_err = err;
            best = std::move(body);
        }
        if (best_err * 10 <= target_particles) break;
        if (count > target_particles) lo = radius; else hi = radius;
        radius = 0.5f * (lo + hi);
    }
    return best;
}

} // namespace

SoftbodyReport run_softbody(const SoftbodyConfig& cfg) {
    transport::SimulatedNetwork net(cfg.seed);
    const auto ep_server = net.create_endpoint();
    const auto ep_client = net.create_endpoint();

    server::ServerHost server({}, [&](int, std::vector<std::uint8_t> dg) {
        net.send(ep_server, ep_client, std::move(dg));
    });
    const int conn = server.add_connection();

    std::uint64_t stream_bytes = 0;
    client::ClientHost viewer({}, [&](std::vector<std::uint8_t> dg) {
        net.send(ep_client, ep_server, std::move(dg));
    });

    client::LocalScene scene;
    scene.entities.push_back(ground_entity("ground", {0, -0.5f, 0}, {20, 0.5f, 20}));
    viewer.start_session(scene, net.now());

    constexpr double kStep = 0.002;
    double stream_window_start = -1;
    const auto pump = [&] {
        net.advance(kStep);
        while (auto d = net.receive(ep_server)) server.on_datagram(conn, d->payload, d->delivered_at);
        while (auto d = net.receive(ep_client)) {
            if (stream_window_start >= 0 && unreliable_of_type(d->payload, wire::MsgType::SoftbodyParticles))
                stream_bytes += d->payload.size();
            viewer.on_datagram(d->payload, d->delivered_at);
        }
        server.update(net.now());
        viewer.update(net.now());
    };

    while (!viewer.ghost().joined() && net.now() < 5.0) pump();

    // Stiffness is capped by the spring network's stability limit at the fixed
    // tick rate: ~13 incident springs per particle put omega*dt near 1 here.
    const Vec3 shell_center{0, 1.25f, 0};
    auto body = build_shell_softbody(cfg.particles, shell_center, 250.0f, 4.0f);

    SoftbodyReport rep;
    rep.particles = static_cast<int>(body.particles.size());
    rep.springs = static_cast<int>(body.springs.size());

    const EntityId shell = server.session().reserve_entity_id();
    Pcc carrier;
    carrier.entity_id = shell;
    carrier.transform = {shell_center, Quat::identity()};
    carrier.transform_only = true;
    server.spawn_containers({&carrier, 1}, net.now());
    server.session().attach_softbody(shell, std::move(body));

    const double t0 = net.now();
    const std::size_t tick_base = server.metrics().size();
    const auto& world = server.session().world();
    const EntityId right_hand = viewer.ghost().avatar().right_hand;

    // Kinetic energy is only sampled once the scripted disturbance is over.
    const double settle_from = cfg.poke ? 8.0 : 2.0;
    std::vector<float> energy;
    std::uint32_t last_tick = world.tick();

    while (net.now() < t0 + cfg.duration) {
        pump();
        const double t = net.now() - t0;
        if (world.tick() != last_tick) {
            last_tick = world.tick();
            if (t >= settle_from) energy.push_back(phys::kinetic_energy(*world.entity(shell).soft));
        }
        if (stream_window_start < 0 && t >= 2.0) stream_window_start = net.now();

        if (cfg.poke && viewer.ghost().joined()) {
            // Scripted press: the right hand dips into the shell and retracts.
            float hand_y = 2.6f;
            if (t >= 3.0 && t < 4.5) hand_y = 2.6f - 1.3f * static_cast<float>((t - 3.0) / 1.5);
            else if (t >= 4.5 && t < 5.5) hand_y = 1.3f;
            else if (t >= 5.5) hand_y = std::min(2.6f, 1.3f + 1.3f * static_cast<float>((t - 5.5) / 1.5));
            const client::OutCommand cmd{client::OutCommand::Kind::MoveTo,
                                         right_hand,
                                         {{0, hand_y, 0}, Quat::identity()}};
            viewer.send_commands({&cmd, 1}, net.now());
        }
    }
    const double stream_window = stream_window_start >= 0 ? net.now() - stream_window_start : 0.0;

    double sum = 0, peak = 0;
    std::size_t ticks = 0;
    for (std::size_t i = tick_base; i < server.metrics().size(); ++i) {
        sum += server.metrics()[i].step_ms;
        peak = std::max(peak, server.metrics()[i].step_ms);
        ++ticks;
    }
    rep.mean_step_ms = ticks ? sum / static_cast<double>(ticks) : 0.0;
    rep.max_step_ms = peak;
    rep.particle_stream_mbit_s = stream_window > 0 ? static_cast<double>(stream_bytes) * 8.0 / 1e6 / stream_window : 0.0;
    rep.model_mbit_s = server.session().config().default_rate * rep.particles * 12.0 * 8.0 / 1e6;
    rep.reference_mbit_s = reference_softbody_mbit(cfg.particles);

    // Per-window kinetic energy peaks over the settle phase must not grow.
    // Resting contact keeps a tiny jitter floor, hence the slack.
    const std::size_t window_ticks = 25;
    bool monotone = energy.size() >= 2 * window_ticks;
    float prev_peak = 0;
    bool first = true;
    for (std::size_t at = 0; at + window_ticks <= energy.size(); at += window_ticks) {
        float w = 0;
        for (std::size_t k = at; k < at + window_ticks; ++k) w = std::max(w, energy[k]);
        if (!first && w > prev_peak * 1.05f + 1e-4f) monotone = false;
        prev_peak = w;
        first = false;
    }
    rep.energy_monotone_after_settle = monotone;
    rep.settled_energy = energy.empty() ? 0.0 : energy.back();
    return rep;
}

namespace {

struct SinkClient {
    wire::Connection conn;
    PlayerId player = kWorldOwner;
    server::AvatarIds avatar;
    std::uint64_t bytes_in = 0;

    void on_datagram(std::span<const std::uint8_t> dg, double now) {
        bytes_in += dg.size();
        conn.on_datagram(dg, now);
        for (const auto& payload : conn.poll()) {
            if (wire::peek_type(payload) == wire::MsgType::JoinAck) {
                const auto ack = wire::decode_join_ack(payload);
                player = ack.player;
                avatar = {ack.head, ack.left_hand, ack.right_hand};
            }
        }
    }
};

struct CcuBot {
    transport::EndpointId ep = 0;
    int conn = 0;
    std::unique_ptr<client::ClientHost> full; // measured bots
    std::unique_ptr<SinkClient> sink;         // everyone else
    EntityId interactable = kNoEntity;
    double joined_at = -1;
    Vec3 pos{};
    Vec3 waypoint{};
    float yaw = 0;
    double next_frame = 0;
    double next_waypoint = 0;
    std::mt19937_64 rng;

    bool ready() const {
        return full ? full->ghost().joined() : sink->player != kWorldOwner;
    }
    PlayerId player() const { return full ? full->ghost().player() : sink->player; }
    server::AvatarIds avatar() const {
        if (full) {
            const auto& a = full->ghost().avatar();
            return {a.head, a.left_hand, a.right_hand};
        }
        return sink->avatar;
    }
};

} // namespace

CcuReport run_ccu(const CcuConfig& cfg) {
    transport::SimulatedNetwork net(cfg.seed);
    net.set_link(cfg.link);
    const auto ep_server = net.create_endpoint();

    std::map<transport::EndpointId, int> conn_of;
    std::map<int, transport::EndpointId> ep_of;
    server::ServerHost server({}, [&](int conn, std::vector<std::uint8_t> dg) {
        net.send(ep_server, ep_of.at(conn), std::move(dg));
    });

    std::vector<CcuBot> bots(cfg.users);
    const int scene_props = std::max(0, 512 - 1 - 4 * cfg.users);
    std::mt19937_64 scene_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);

    const auto make_bot = [&](int i) {
        CcuBot& b = bots[i];
        b.ep = net.create_endpoint();
        b.conn = server.add_connection();
        conn_of[b.ep] = b.conn;
        ep_of[b.conn] = b.ep;
        b.rng.seed(cfg.seed * 1000003ull + static_cast<std::uint64_t>(i));
        if (i < cfg.measured_clients) {
            const auto ep = b.ep;
            b.full = std::make_unique<client::ClientHost>(client::GhostConfig{}, [&net, ep, ep_server](std::vector<std::uint8_t> dg) {
                net.send(ep, ep_server, std::move(dg));
            });
        } else {
            b.sink = std::make_unique<SinkClient>();
        }
    };

    // The first bot brings the scene: a ground strip along the spawn lanes
    // plus enough resting props to land on 512 replicated physics objects.
    make_bot(0);
    {
        client::LocalScene scene;
        scene.entities.push_back(ground_entity("ground", {105, -0.5f, 0}, {130, 0.5f, 25}));
        std::uniform_real_distribution<float> ux(2.0f, 208.0f);
        std::uniform_real_distribution<float> uz(-8.0f, 8.0f);
        for (int k = 0; k < scene_props; ++k) {
            client::LocalEntity e;
            e.name = "prop_" + std::to_string(k);
            e.local.position = {ux(scene_rng), 0.25f, uz(scene_rng)};
            e.body = BodySpec{1.0f, false, 0.1f, 0.0f};
            e.collider = ColliderSpec{BoxShape{{0.25f, 0.25f, 0.25f}}, false};
            scene.entities.push_back(std::move(e));
        }
        bots[0].full->start_session(scene, net.now());
    }

    const double join_end = (cfg.users - 1) * cfg.join_interval;
    const double duration = join_end + cfg.steady_duration;
    int next_join = 1;

    std::vector<double> outbound_kb;
    std::uint64_t last_bytes = 0;
    double next_second = 1.0;

    double max_div = 0;
    double next_div_sample = 0;
    std::vector<EntityId> owned_ids;

    const auto bot_frame = [&](CcuBot& b, double now) {
        if (now >= b.next_waypoint) {
            const float lane = 2.0f * static_cast<float>(b.player());
            std::uniform_real_distribution<float> ux(lane - 8.0f, lane + 8.0f);
            std::uniform_real_distribution<float> uz(-8.0f, 8.0f);
            b.waypoint = {ux(b.rng), 0, uz(b.rng)};
            b.next_waypoint = now + cfg.waypoint_refresh;
        }
        const Vec3 to = b.waypoint - b.pos;
        const float dist = length(to);
        if (dist > 1e-4f) {
            const Vec3 dir = to / dist;
            const float step = std::min(dist, static_cast<float>(cfg.walk_speed * cfg.bot_frame));
            b.pos += dir * step;
            b.yaw = std::atan2(dir.x, dir.z);
        }
        // Offsets stay body-fixed (no yaw swing) so every driven position moves
        // at exactly walk speed; heading shows up in the rotation field only.
        const Quat rot = Quat::from_axis_angle({0, 1, 0}, b.yaw);
        const auto ids = b.avatar();
        const Transform head{b.pos + Vec3{0, 1.6f, 0}, rot};
        const Transform left{b.pos + Vec3{-0.3f, 1.2f, 0.3f}, rot};
        const Transform right{b.pos + Vec3{0.3f, 1.2f, 0.3f}, rot};
        const Transform carry{b.pos + Vec3{0.45f, 1.0f, 0.0f}, rot};
        if (b.full) {
            auto cmds = b.full->ghost().drive_avatar(head, left, right);
            if (b.interactable != kNoEntity)
                cmds.push_back({client::OutCommand::Kind::MoveTo, b.interactable, carry});
            b.full->send_commands(cmds, now);
        } else {
            const PlayerId p = b.player();
            b.sink->conn.send_unreliable(wire::encode_move_to({p, ids.head, head}));
            b.sink->conn.send_unreliable(wire::encode_move_to({p, ids.left_hand, left}));
            b.sink->conn.send_unreliable(wire::encode_move_to({p, ids.right_hand, right}));
            if (b.interactable != kNoEntity)
                b.sink->conn.send_unreliable(wire::encode_move_to({p, b.interactable, carry}));
            for (auto& dg : b.sink->conn.out()) net.send(b.ep, ep_server, std::move(dg));
        }
    };

    constexpr double kStep = 0.002;
    while (net.now() < duration) {
        net.advance(kStep);
        const double now = net.now();

        while (next_join < cfg.users && now >= next_join * cfg.join_interval) {
            make_bot(next_join);
            CcuBot& b = bots[next_join];
            if (b.full) b.full->join(now);
            else {
                b.sink->conn.send_reliable(wire::encode_join(), now);
                for (auto& dg : b.sink->conn.out()) net.send(b.ep, ep_server, std::move(dg));
            }
            ++next_join;
        }

        while (auto d = net.receive(ep_server)) server.on_datagram(conn_of.at(d->from), d->payload, d->delivered_at);
        for (int i = 0; i < next_join; ++i) {
            CcuBot& b = bots[i];
            if (b.ep == 0) continue;
            while (auto d = net.receive(b.ep)) {
                if (b.full) b.full->on_datagram(d->payload, d->delivered_at);
                else b.sink->on_datagram(d->payload, d->delivered_at);
            }
        }

        server.update(now);
        for (int i = 0; i < next_join; ++i) {
            CcuBot& b = bots[i];
            if (!b.ready()) continue;
            if (b.joined_at < 0) {
                b.joined_at = now;
                const float lane = 2.0f * static_cast<float>(b.player());
                b.pos = {lane, 0, 0};
                b.waypoint = b.pos;
                b.next_frame = now;
                b.next_waypoint = now;
            }
            if (b.interactable == kNoEntity) {
                const EntityId id = server.session().reserve_entity_id();
                const Pcc pcc = prop_pcc(id, {b.pos + Vec3{0.45f, 1.0f, 0}, Quat::identity()},
                                         SphereShape{0.12f}, 1.0f, 0.0f, 0.0f, true, b.player());
                server.spawn_containers({&pcc, 1}, now);
                b.interactable = id;
                owned_ids.push_back(id);
                for (EntityId a : {b.avatar().head, b.avatar().left_hand, b.avatar().right_hand})
                    owned_ids.push_back(a);
            }
            while (now >= b.next_frame) {
                bot_frame(b, b.next_frame);
                b.next_frame += cfg.bot_frame;
            }
            if (b.full) b.full->update(now);
            else {
                b.sink->conn.update(now);
                for (auto& dg : b.sink->conn.out()) net.send(b.ep, ep_server, std::move(dg));
            }
        }

        if (now >= next_second) {
            outbound_kb.push_back(static_cast<double>(server.bytes_out() - last_bytes) / 1000.0);
            last_bytes = server.bytes_out();
            next_second += 1.0;
        }

        if (now >= next_div_sample) {
            next_div_sample = now + 0.25;
            const auto& world = server.session().world();
            for (int i = 0; i < std::min(cfg.measured_clients, next_join); ++i) {
                const CcuBot& b = bots[i];
                if (!b.full || b.joined_at < 0 || now - b.joined_at < 2.0) continue;
                for (EntityId id : owned_ids) {
                    if (!world.contains(id)) continue;
                    const auto rendered = b.full->ghost().sample_render_transform(id, now);
                    if (!rendered) continue;
                    const float err = length(rendered->position - world.transform_of(id).position);
                    max_div = std::max(max_div, static_cast<double>(err));
                }
            }
        }
    }

    CcuReport rep;
    rep.users = cfg.users;
    rep.outbound_kb_s = outbound_kb;
    rep.join_end = join_end;
    rep.max_divergence_m = max_div;
    // Kinematic envelope: no entity outruns the drive cap, and a rendered pose
    // lags the authoritative one by at most transit plus two send intervals
    // plus one command frame.
    const double horizon = cfg.link.latency + cfg.link.jitter +
                           2.0 / server.session().config().critical_rate + cfg.bot_frame;
    rep.divergence_bound_m =
        server.session().world().config().drive_v_max * horizon + wire::kDefaultPosEps;

    // Smoothed join-phase curve must keep rising; steady phase holds a band.
    const auto smoothed = [&](std::size_t k) {
        double s = 0;
        int c = 0;
        for (std::size_t j = (k >= 2 ? k - 2 : 0); j <= k + 2 && j < outbound_kb.size(); ++j) {
            s += outbound_kb[j];
            ++c;
        }
        return s / std::max(1, c);
    };
    rep.curve_monotone_during_joins = true;
    const std::size_t join_seconds = static_cast<std::size_t>(join_end);
    for (std::size_t k = 3; k + 5 < join_seconds && k + 5 < outbound_kb.size(); ++k) {
        if (smoothed(k + 5) < smoothed(k) * 0.98) {
            rep.curve_monotone_during_joins = false;
            break;
        }
    }
    const std::size_t steady_from = std::min(outbound_kb.size(), join_seconds + 5);
    double steady_sum = 0;
    std::size_t steady_n = 0;
    for (std::size_t k = steady_from; k < outbound_kb.size(); ++k) {
        steady_sum += outbound_kb[k];
        ++steady_n;
    }
    rep.steady_mean_kb_s = steady_n ? steady_sum / static_cast<double>(steady_n) : 0.0;
    if (rep.steady_mean_kb_s > 0)
        for (std::size_t k = steady_from; k < outbound_kb.size(); ++k)
            rep.steady_band = std::max(rep.steady_band,
                                       std::abs(outbound_kb[k] - rep.steady_mean_kb_s) / rep.steady_mean_kb_s);

    for (int i = 0; i < std::min(cfg.measured_clients, next_join); ++i)
        if (bots[i].full) rep.unknown_records += bots[i].full->ghost().unknown_records();

    int physics_objects = 0;
    for (const auto& [id, e] : server.session().world().entities())
        if (!e.transform_only) ++physics_objects;
    rep.physics_objects = physics_objects;
    rep.capacity_users = physics_objects / 4;
    return rep;
}

RelayReport run_relay(const RelayRunConfig& cfg) {
    transport::SimulatedNetwork net(cfg.seed);
    net.set_link(cfg.link);
    const auto ep_relay = net.create_endpoint();
    const auto ep_host = net.create_endpoint();

    std::map<int, transport::EndpointId> ep_of;
    server::RelayHost relay({cfg.send_rate}, [&](int conn, std::vector<std::uint8_t> dg) {
        net.send(ep_relay, ep_of.at(conn), std::move(dg));
    });
    const int host_conn = relay.add_connection(true);
    ep_of[host_conn] = ep_host;
    wire::Connection host_link;

    struct Sub {
        transport::EndpointId ep;
        int conn;
        wire::Connection link;
        std::map<EntityId, Transform> state;
        std::map<EntityId, double> applied_at;
        std::uint64_t records = 0;
        std::uint64_t bytes = 0;
    };
    std::vector<Sub> subs(cfg.subscribers);
    for (auto& s : subs) {
        s.ep = net.create_endpoint();
        s.conn = relay.add_connection(false);
        ep_of[s.conn] = s.ep;
    }

    // Every object orbits and spins fast enough that each send interval sees
    // both thresholds crossed, so the fanout carries all objects, full masks.
    const auto pose_at = [&](int k, double t) {
        const float phase = 2.399963f * static_cast<float>(k);
        const float a = static_cast<float>(t) + phase;
        const Vec3 center{static_cast<float>(k % 32) * 2.0f, 1.0f + 0.05f * static_cast<float>(k % 7),
                          static_cast<float>(k / 32) * 2.0f};
        Transform tr;
        tr.position = center + Vec3{0.5f * std::cos(a), 0.1f * std::sin(a * 1.7f), 0.5f * std::sin(a)};
        tr.rotation = Quat::from_axis_angle({0, 1, 0}, a);
        return tr;
    };

    const double host_dt = 1.0 / cfg.host_rate;
    double next_host = 0;
    std::uint32_t host_tick = 0;
    const double interval = 1.0 / cfg.send_rate;
    double max_staleness = 0;

    constexpr double kStep = 0.002;
    while (net.now() < cfg.duration) {
        net.advance(kStep);
        const double now = net.now();

        while (now >= next_host) {
            std::vector<wire::TransformRecord> records;
            records.reserve(cfg.objects);
            for (int k = 0; k < cfg.objects; ++k) {
                const Transform tr = pose_at(k, next_host);
                records.push_back({static_cast<EntityId>(k + 1), kWorldOwner,
                                   static_cast<std::uint8_t>(wire::kMaskPosition | wire::kMaskRotation),
                                   tr.position, tr.rotation});
            }
            for (const auto& group : wire::encode_group(records, ++host_tick))
                host_link.send_unreliable(group);
            for (auto& dg : host_link.out()) net.send(ep_host, ep_relay, std::move(dg));
            next_host += host_dt;
        }

        while (auto d = net.receive(ep_relay)) relay.on_datagram(host_conn, d->payload, d->delivered_at);
        relay.update(now);

        for (auto& s : subs) {
            while (auto d = net.receive(s.ep)) {
                s.bytes += d->payload.size();
                s.link.on_datagram(d->payload, d->delivered_at);
                for (const auto& payload : s.link.poll()) {
                    if (wire::peek_type(payload) != wire::MsgType::GroupedUpdate) continue;
                    const auto msg = wire::decode_group(payload);
                    for (const auto& rec : msg.records) {
                        s.state[rec.entity_id] = wire::apply_record(s.state[rec.entity_id], rec);
                        s.applied_at[rec.entity_id] = d->delivered_at;
                        ++s.records;
                    }
                }
            }
            if (now > 3.0 * interval) {
                for (const auto& [id, at] : s.applied_at)
                    max_staleness = std::max(max_staleness, (now - at) / interval);
            }
        }
    }

    RelayReport rep;
    rep.objects = cfg.objects;
    const auto meter = relay.meter_report(cfg.duration - 2.0, cfg.duration);
    double acc = 0;
    for (const auto& s : subs) {
        auto it = meter.find(s.conn);
        if (it != meter.end()) acc += it->second;
    }
    rep.per_subscriber_kb_s = subs.empty() ? 0.0 : acc / static_cast<double>(subs.size());
    if (!subs.empty() && subs[0].records > 0) {
        const double baseline = static_cast<double>(subs[0].records) *
                                (35.0 + 7.0 + wire::kEnvelopeOverhead);
        rep.grouping_savings = 1.0 - static_cast<double>(subs[0].bytes) / baseline;
    }
    rep.max_staleness_intervals = max_staleness;
    rep.rejected_updates = relay.rejected_updates();
    rep.reference_kb_s = reference_relay_kb(cfg.objects);
    rep.reference_alt_kb_s = reference_relay_alt_kb(cfg.objects);
    return rep;
}

LatencyBreakdown analytic_breakdown(const LatencyConfig& cfg) {
    LatencyBreakdown b;
    b.render_a = cfg.render_a;
    b.render_b = cfg.render_b;
    b.net_a = cfg.net_a;
    b.net_b = cfg.net_b;
    b.phys = cfg.phys;
    b.interval = 0.5 / 48.0; // mean wait for the next critical-rate send
    return b;
}

LatencyReport run_latency(const LatencyConfig& cfg) {
    transport::SimulatedNetwork net(cfg.seed);
    const auto ep_server = net.create_endpoint();
    const auto ep_a = net.create_endpoint();
    const auto ep_b = net.create_endpoint();
    net.set_link(ep_b, ep_server, {cfg.net_b, 0, 0});
    net.set_link(ep_server, ep_a, {cfg.net_a, 0, 0});

    server::ServerHost::Config scfg;
    scfg.virtual_step_cost = cfg.phys;
    std::map<int, transport::EndpointId> ep_of;
    server::ServerHost server(scfg, [&](int conn, std::vector<std::uint8_t> dg) {
        net.send(ep_server, ep_of.at(conn), std::move(dg));
    });
    const int conn_a = server.add_connection();
    const int conn_b = server.add_connection();
    ep_of[conn_a] = ep_a;
    ep_of[conn_b] = ep_b;

    client::ClientHost a({}, [&](std::vector<std::uint8_t> dg) { net.send(ep_a, ep_server, std::move(dg)); });
    client::ClientHost b({}, [&](std::vector<std::uint8_t> dg) { net.send(ep_b, ep_server, std::move(dg)); });

    client::LocalScene scene;
    scene.entities.push_back(ground_entity("ground", {0, -0.5f, 0}, {30, 0.5f, 30}));
    a.start_session(scene, net.now());

    EntityId object = kNoEntity;
    double trial_t0 = -1;
    bool command_sent = false;
    bool observed = true;
    double measured_sum = 0;
    int measured_n = 0;
    int trial = 0;

    constexpr double kStep = 0.00025;
    const auto pump = [&] {
        net.advance(kStep);
        while (auto d = net.receive(ep_server)) {
            const int conn = d->from == ep_a ? conn_a : conn_b;
            server.on_datagram(conn, d->payload, d->delivered_at);
        }
        while (auto d = net.receive(ep_a)) {
            if (!observed && unreliable_of_type(d->payload, wire::MsgType::GroupedUpdate)) {
                const auto msg = wire::decode_group(std::span(d->payload).subspan(wire::kEnvelopeOverhead));
                for (const auto& rec : msg.records) {
                    if (rec.entity_id == object) {
                        measured_sum += (d->delivered_at + cfg.render_a) - trial_t0;
                        ++measured_n;
                        observed = true;
                        break;
                    }
                }
            }
            a.on_datagram(d->payload, d->delivered_at);
        }
        while (auto d = net.receive(ep_b)) b.on_datagram(d->payload, d->delivered_at);
        server.update(net.now());
        a.update(net.now());
        b.update(net.now());
    };

    while (!a.ghost().joined() && net.now() < 5.0) pump();
    b.join(net.now());
    while (!b.ghost().joined() && net.now() < 10.0) pump();

    object = server.session().reserve_entity_id();
    const Pcc pcc = prop_pcc(object, {{5, 3, 0}, Quat::identity()}, SphereShape{0.1f}, 1.0f, 0.0f, 0.0f,
                             true, b.ghost().player());
    server.spawn_containers({&pcc, 1}, net.now());

    // Let the object settle and the snapshot traffic drain before timing.
    const double warm_end = net.now() + 2.0;
    while (net.now() < warm_end) pump();

    // Dithering the trial starts keeps the spacing from aliasing against the
    // server tick grid, which would pin every command to the same tick phase.
    const double spacing = 1.25;
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> dither(0.0, 0.02);
    const auto frame_align = [&](double t) { return std::ceil(t / cfg.render_b) * cfg.render_b; };
    trial_t0 = frame_align(net.now() + dither(rng));

    while (trial < cfg.trials) {
        pump();
        const double now = net.now();
        if (!command_sent && now >= trial_t0 + cfg.render_b) {
            const Vec3 target{5.0f + ((trial % 2) ? 1.0f : -1.0f), 3.0f, 0.0f};
            const client::OutCommand cmd{client::OutCommand::Kind::MoveTo, object, {target, Quat::identity()}};
            b.send_commands({&cmd, 1}, now);
            command_sent = true;
            observed = false;
        }
        if (command_sent && now >= trial_t0 + spacing) {
            ++trial;
            trial_t0 = frame_align(trial_t0 + spacing + dither(rng));
            command_sent = false;
            observed = true;
        }
    }

    LatencyReport rep;
    rep.analytic = analytic_breakdown(cfg);
    rep.trials = measured_n;
    rep.measured_total_s = measured_n ? measured_sum / measured_n : 0.0;
    return rep;
}

} // namespace physlink::bench
