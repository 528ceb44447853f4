#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "physlink/server/session.hpp"
#include "physlink/wire/reliable.hpp"

namespace physlink::server {

struct TickMetrics {
    std::uint32_t tick = 0;
    double step_ms = 0;
    std::size_t entities = 0;
    std::size_t records_sent = 0;
    std::uint64_t bytes_out = 0;
    std::size_t events_out = 0;
};

// Transport glue around a Session: one reliability connection per client,
// command dispatch, fixed-rate ticking, and encode-once fanout. Datagrams go
// out through the injected send function so the same host runs on simulated
// links and real sockets.
class ServerHost {
public:
    struct Config {
        SessionConfig session{};
        std::size_t max_payload = wire::kDefaultMaxPayload;
        // Virtual compute cost per tick: outgoing state for a tick is released
        // this long after the tick boundary (latency experiments).
        double virtual_step_cost = 0.0;
    };

    using SendFn = std::function<void(int conn, std::vector<std::uint8_t> datagram)>;

    ServerHost(Config cfg, SendFn send) : cfg_(cfg), session_(cfg.session), send_(std::move(send)) {}

    int add_connection();
    void remove_connection(int conn, double now);
    void on_datagram(int conn, std::span<const std::uint8_t> datagram, double now);

    // Server-side content added after initialization (props, bot
    // interactables). Joined clients learn the new entities reliably.
    void spawn_containers(std::span<const Pcc> pccs, double now);

    // Pumps reliability timers, runs every tick whose boundary has passed,
    // and releases delayed sends.
    void update(double now);

    Session& session() { return session_; }
    const Session& session() const { return session_; }
    const std::vector<TickMetrics>& metrics() const { return metrics_; }
    std::uint64_t bytes_out() const { return bytes_out_; }
    std::uint64_t bytes_to(int conn) const;
    std::uint64_t protocol_errors() const { return protocol_errors_; }

private:
    struct Client {
        wire::Connection conn;
        PlayerId player = kWorldOwner; // kWorldOwner until joined
    };

    void dispatch(int conn, Client& c, std::span<const std::uint8_t> payload, double now);
    void do_join(int conn, Client& c, double now);
    void run_tick(double tick_time);
    void flush(double now);

    Config cfg_;
    Session session_;
    SendFn send_;
    std::map<int, Client> clients_;
    int next_conn_ = 1;
    std::vector<int> queued_joins_;
    double next_tick_time_ = 0;
    bool first_update_ = true;

    struct Pending {
        double release_at = 0;
        int conn = 0;
        std::vector<std::uint8_t> datagram;
    };
    std::deque<Pending> pending_;

    std::vector<TickMetrics> metrics_;
    std::uint64_t bytes_out_ = 0;
    std::map<int, std::uint64_t> bytes_per_conn_;
    std::uint64_t protocol_errors_ = 0;
};

} // namespace physlink::server
