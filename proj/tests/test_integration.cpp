#include <doctest.h>

#include <cmath>
#include <map>
#include <memory>
#include <vector>

#include "physlink/client/client_host.hpp"
#include "physlink/server/server_host.hpp"
#include "physlink/transport/sim_network.hpp"

#include "helpers.hpp"

using namespace physlink;
using testutil::approx_vec;

namespace {

Transform at(float x, float y, float z) { return {{x, y, z}, Quat::identity()}; }

// floor(1) + kinematic interactable ball(2) in hover range of player 1's right
// hand + a dynamic rock(3) falling far away for steady update traffic.
client::LocalScene demo_scene(float rock_restitution = 0.0f) {
    client::LocalScene scene;

    client::LocalEntity floor;
    floor.name = "floor";
    floor.local = at(0, -0.5f, 0);
    floor.collider = ColliderSpec{BoxShape{{10, 0.5f, 10}}, false};
    scene.entities.push_back(floor);

    client::LocalEntity ball;
    ball.name = "ball";
    ball.local = at(2.42f, 1.2f, 0.3f);
    ball.interactable = true;
    ball.body = BodySpec{1.0f, true, 0.0f, 0.0f};
    ball.collider = ColliderSpec{SphereShape{0.05f}, false};
    scene.entities.push_back(ball);

    client::LocalEntity rock;
    rock.name = "rock";
    rock.local = at(-5, 2, 0);
    rock.body = BodySpec{1.0f, false, 0.0f, rock_restitution};
    rock.collider = ColliderSpec{SphereShape{0.5f}, false};
    scene.entities.push_back(rock);
    return scene;
}

// A server and N clients joined by a simulated network, pumped in 1 ms slices.
struct NetRig {
    transport::SimulatedNetwork net;
    int server_ep = 0;
    std::map<int, int> conn_to_ep;
    std::map<int, int> ep_to_conn;
    std::map<int, std::vector<std::vector<std::uint8_t>>> grouped_log; // conn -> update payloads
    server::ServerHost server;

    struct ClientSlot {
        int ep = 0;
        int conn = 0;
        std::unique_ptr<client::ClientHost> host;
    };
    std::vector<ClientSlot> clients;

    explicit NetRig(unsigned seed = 0, transport::SimulatedNetwork::LinkParams link = {},
                    server::ServerHost::Config cfg = {})
        : net(seed), server(cfg, [this](int conn, std::vector<std::uint8_t> dg) {
              const auto env = wire::decode_envelope(dg);
              if (env.channel == wire::Channel::Unreliable &&
                  wire::peek_type(env.payload) == wire::MsgType::GroupedUpdate)
                  grouped_log[conn].push_back(env.payload);
              net.send(server_ep, conn_to_ep.at(conn), dg);
          }) {
        server_ep = net.create_endpoint();
        net.set_link(link);
    }

    client::ClientHost& add_client() {
        ClientSlot slot;
        slot.ep = net.create_endpoint();
        slot.conn = server.add_connection();
        conn_to_ep[slot.conn] = slot.ep;
        ep_to_conn[slot.ep] = slot.conn;
        const int ep = slot.ep;
        slot.host = std::make_unique<client::ClientHost>(
            client::GhostConfig{}, [this, ep](std::vector<std::uint8_t> dg) { net.send(ep, server_ep, dg); });
        clients.push_back(std::move(slot));
        return *clients.back().host;
    }

    void pump(double duration) {
        const int steps = static_cast<int>(duration * 1000.0 + 0.5);
        for (int i = 0; i < steps; ++i) {
            net.advance(0.001);
            const double now = net.now();
            while (auto dg = net.receive(server_ep))
                server.on_datagram(ep_to_conn.at(dg->from), dg->payload, now);
            for (auto& slot : clients)
                while (auto dg = net.receive(slot.ep)) slot.host->on_datagram(dg->payload, now);
            server.update(now);
            for (auto& slot : clients) slot.host->update(now);
        }
    }
};

} // namespace

TEST_CASE("the first client brings the session up and joins it") {
    NetRig rig;
    auto& c1 = rig.add_client();
    auto scene = demo_scene();
    c1.start_session(scene, 0.0);
    rig.pump(0.2);

    CHECK(rig.server.session().initialized());
    CHECK(rig.server.session().world().entity_count() == 6); // 3 scene + 3 avatar
    REQUIRE(c1.ghost().joined());
    CHECK(c1.ghost().player() == 1);

    // The snapshot filled the registry: dissected scene plus own avatar.
    CHECK(c1.ghost().registry().size() == 6);
    const EntityId ball = c1.ghost().dissected_ids().at("ball");
    REQUIRE(c1.ghost().gro(ball) != nullptr);
    CHECK(c1.ghost().gro(ball)->interactable);
    CHECK(c1.ghost().gro(ball)->curr.has_value());
    CHECK(c1.ghost().gro(c1.ghost().avatar().head) != nullptr);
    CHECK(rig.server.protocol_errors() == 0);

    // The falling rock produces live updates.
    CHECK(c1.updates_received() > 0);
    CHECK(c1.last_update_tick() > 0);
    CHECK(c1.ghost().unknown_records() == 0);
}

TEST_CASE("later joiners get the snapshot and everyone learns their avatars") {
    NetRig rig;
    auto& c1 = rig.add_client();
    auto scene = demo_scene();
    c1.start_session(scene, 0.0);
    rig.pump(0.1);

    auto& c2 = rig.add_client();
    c2.join(rig.net.now());
    rig.pump(0.2);

    REQUIRE(c2.ghost().joined());
    CHECK(c2.ghost().player() == 2);
    CHECK(c2.ghost().registry().size() == 9); // scene + both avatars
    CHECK(c2.ghost().unknown_records() == 0);

    // The earlier client was told about the newcomer's avatar.
    const EntityId c2_head = c2.ghost().avatar().head;
    REQUIRE(c1.ghost().gro(c2_head) != nullptr);
    CHECK(c1.ghost().registry().size() == 9);
    CHECK(c1.ghost().unknown_records() == 0);
}

TEST_CASE("a join that beats scene submission is parked until the scene lands") {
    NetRig rig;
    auto& c1 = rig.add_client();
    auto& c2 = rig.add_client();

    c2.join(0.0);
    rig.pump(0.05);
    CHECK_FALSE(c2.ghost().joined());
    CHECK_FALSE(rig.server.session().initialized());

    auto scene = demo_scene();
    c1.start_session(scene, rig.net.now());
    rig.pump(0.2);
    REQUIRE(c2.ghost().joined());
    REQUIRE(c1.ghost().joined());
    CHECK(c2.ghost().player() == 1); // queued join resolves first
    CHECK(c1.ghost().player() == 2);
}

TEST_CASE("unknown message types are counted as protocol errors") {
    NetRig rig;
    rig.add_client();
    const int conn = rig.clients[0].conn;

    wire::Envelope env;
    env.channel = wire::Channel::Unreliable;
    env.seq = 1;
    env.payload = {0xEE};
    rig.server.on_datagram(conn, wire::encode_envelope(env), 0.0);
    CHECK(rig.server.protocol_errors() == 1);

    // A second scene submission after initialization is also an error.
    auto& c1 = *rig.clients[0].host;
    auto scene = demo_scene();
    c1.start_session(scene, 0.0);
    rig.pump(0.1);
    REQUIRE(rig.server.session().initialized());

    client::GhostController stray;
    auto scene2 = demo_scene();
    const auto batch = stray.dissect_scene(scene2);
    env.seq = 2;
    env.payload = wire::encode_pcc_batch(batch);
    rig.server.on_datagram(conn, wire::encode_envelope(env), rig.net.now());
    CHECK(rig.server.protocol_errors() == 2);
}

TEST_CASE("every client receives the same grouped bytes") {
    NetRig rig;
    auto& c1 = rig.add_client();
    auto scene = demo_scene();
    c1.start_session(scene, 0.0);
    rig.pump(0.1);
    auto& c2 = rig.add_client();
    c2.join(rig.net.now());
    rig.pump(0.1);
    rig.grouped_log.clear(); // compare only the window where both are joined

    rig.pump(0.5); // the rock is still settling
    const auto& log1 = rig.grouped_log[rig.clients[0].conn];
    const auto& log2 = rig.grouped_log[rig.clients[1].conn];
    REQUIRE(!log1.empty());
    CHECK(log1 == log2);
    CHECK(c1.updates_received() > 0);
    CHECK(c2.updates_received() > 0);
}

TEST_CASE("clients reconstruct the server pose exactly at update ticks") {
    NetRig rig;
    auto& c1 = rig.add_client();
    auto scene = demo_scene();
    c1.start_session(scene, 0.0);
    rig.pump(0.2);
    const EntityId ball = c1.ghost().dissected_ids().at("ball");

    const Transform target{{3.0f, 1.5f, 0.25f}, Quat::from_axis_angle({0, 0, 1}, 0.5f)};
    rig.server.session().world().teleport(ball, target);
    rig.pump(0.3); // at most one default interval plus slack

    REQUIRE(c1.ghost().gro(ball)->curr.has_value());
    const Transform got = c1.ghost().gro(ball)->curr->transform;
    CHECK(got == rig.server.session().world().entity(ball).pose); // bit-exact off the wire
}

TEST_CASE("grab, drag, and release run end to end over the network") {
    NetRig rig;
    auto& c1 = rig.add_client();
    auto scene = demo_scene();
    c1.start_session(scene, 0.0);
    rig.pump(0.2);

    const EntityId ball = c1.ghost().dissected_ids().at("ball");
    REQUIRE(c1.ghost().hovered(1) == ball); // hover event arrived with the first ticks

    Transform hand = at(2.3f, 1.2f, 0.3f);
    auto cmds = c1.ghost().update_hand(1, hand, true);
    REQUIRE(cmds.size() == 1);
    c1.send_commands(cmds, rig.net.now());
    rig.pump(0.05);
    CHECK(rig.server.session().grabber_of(ball) == c1.ghost().player());

    for (int i = 0; i < 20; ++i) {
        hand.position.x += 0.01f;
        cmds = c1.ghost().update_hand(1, hand, true);
        REQUIRE(cmds.size() == 1);
        c1.send_commands(cmds, rig.net.now());
        rig.pump(0.02);
    }
    // The kinematic ball teleports to the commanded target: hand motion plus
    // the grip offset captured at grab time.
    const Vec3 server_pos = rig.server.session().world().entity(ball).pose.position;
    CHECK(approx_vec(server_pos, {2.42f + 0.2f, 1.2f, 0.3f}, 1e-3f));

    cmds = c1.ghost().update_hand(1, hand, false);
    REQUIRE(cmds.size() == 1);
    c1.send_commands(cmds, rig.net.now());
    rig.pump(0.05);
    CHECK(rig.server.session().grabber_of(ball) == kWorldOwner);
    CHECK(rig.server.session().rejected_commands() == 0);
}

TEST_CASE("server-spawned props announce themselves to joined clients") {
    NetRig rig;
    auto& c1 = rig.add_client();
    auto scene = demo_scene();
    c1.start_session(scene, 0.0);
    rig.pump(0.2);

    Pcc prop;
    prop.entity_id = rig.server.session().reserve_entity_id();
    prop.transform = at(0, 3, 0);
    prop.interactable = true;
    prop.body = BodySpec{1.0f, true, 0.0f, 0.0f};
    prop.collider = ColliderSpec{SphereShape{0.1f}, false};
    const Pcc props[] = {prop};
    rig.server.spawn_containers(props, rig.net.now());
    rig.pump(0.1);

    REQUIRE(c1.ghost().gro(prop.entity_id) != nullptr);
    CHECK(c1.ghost().gro(prop.entity_id)->interactable);
    CHECK(approx_vec(c1.ghost().gro(prop.entity_id)->curr->transform.position, {0, 3, 0}, 1e-6f));
    CHECK(c1.ghost().unknown_records() == 0);
}

TEST_CASE("a departing client's avatar is destroyed everywhere") {
    NetRig rig;
    auto& c1 = rig.add_client();
    auto scene = demo_scene();
    c1.start_session(scene, 0.0);
    rig.pump(0.1);
    auto& c2 = rig.add_client();
    c2.join(rig.net.now());
    rig.pump(0.15);

    const EntityId c2_head = c2.ghost().avatar().head;
    REQUIRE(c1.ghost().gro(c2_head) != nullptr);

    rig.server.remove_connection(rig.clients[1].conn, rig.net.now());
    rig.pump(0.1);
    CHECK(rig.server.session().world().entity_count() == 6); // back to one avatar
    CHECK(c1.ghost().gro(c2_head) == nullptr);
    CHECK(c1.ghost().registry().size() == 6);
}

TEST_CASE("join and leave churn does not disturb simulation state") {
    auto final_rock = [](bool churn) {
        NetRig rig;
        auto& c1 = rig.add_client();
        auto scene = demo_scene();
        c1.start_session(scene, 0.0);
        rig.pump(0.3);
        if (churn) {
            auto& c2 = rig.add_client();
            c2.join(rig.net.now());
        }
        rig.pump(0.3);
        if (churn) rig.server.remove_connection(rig.clients[1].conn, rig.net.now());
        rig.pump(0.6);
        const EntityId rock = c1.ghost().dissected_ids().at("rock");
        const auto& e = rig.server.session().world().entity(rock);
        return std::make_tuple(rig.server.session().world().tick(), e.pose, e.body->velocity);
    };

    const auto quiet = final_rock(false);
    const auto churned = final_rock(true);
    REQUIRE(std::get<0>(quiet) == std::get<0>(churned)); // same tick count
    CHECK(std::get<1>(quiet) == std::get<1>(churned));   // bitwise pose
    CHECK(std::get<2>(quiet) == std::get<2>(churned));   // bitwise velocity
}

TEST_CASE("collision events arrive reliably and in order over a jittery link") {
    transport::SimulatedNetwork::LinkParams link;
    link.latency = 0.010;
    link.jitter = 0.008;
    NetRig rig(3, link);
    auto& c1 = rig.add_client();
    auto scene = demo_scene(0.9f); // a bouncy rock: repeated enter/exit pairs
    c1.start_session(scene, 0.0);
    rig.pump(0.3);
    const EntityId floor = c1.ghost().dissected_ids().at("floor");
    const EntityId rock = c1.ghost().dissected_ids().at("rock");

    std::vector<ContactKind> kinds;
    c1.ghost().subscribe_collision([&](const CollisionEvent& ev) {
        if ((ev.a == floor && ev.b == rock) || (ev.a == rock && ev.b == floor)) kinds.push_back(ev.kind);
    });
    rig.pump(3.0);

    REQUIRE(kinds.size() >= 4);
    for (std::size_t i = 0; i < kinds.size(); ++i)
        CHECK(kinds[i] == (i % 2 == 0 ? ContactKind::Enter : ContactKind::Exit));
}

TEST_CASE("clients ride out datagram loss") {
    transport::SimulatedNetwork::LinkParams link;
    link.latency = 0.005;
    link.loss = 0.10;
    NetRig rig(11, link);
    auto& c1 = rig.add_client();
    auto scene = demo_scene();
    c1.start_session(scene, 0.0);
    rig.pump(0.4);
    REQUIRE(c1.ghost().joined());
    const EntityId ball = c1.ghost().dissected_ids().at("ball");

    float x = 2.42f;
    for (int i = 0; i < 100; ++i) {
        x += 0.004f;
        rig.server.session().world().teleport(ball, at(x, 1.2f, 0.3f));
        rig.pump(0.02);
    }
    rig.pump(0.3); // quiesce

    CHECK(c1.ghost().unknown_records() == 0);
    CHECK_FALSE(c1.connection().dead());
    REQUIRE(c1.ghost().gro(ball)->curr.has_value());
    // A lost final update leaves at most one interval of motion unseen.
    const float err = std::abs(c1.ghost().gro(ball)->curr->transform.position.x - x);
    CHECK(err <= 0.05f);
    CHECK(rig.server.protocol_errors() == 0);
}
