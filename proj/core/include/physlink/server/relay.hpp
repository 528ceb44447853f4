#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "physlink/wire/messages.hpp"
#include "physlink/wire/reliable.hpp"

namespace physlink::server {

struct RelayConfig {
    float send_rate = 12.0f; // Hz
    float pos_eps = wire::kDefaultPosEps;
    float rot_eps = wire::kDefaultRotEps;
    std::size_t max_payload = wire::kDefaultMaxPayload;
};

struct RelayMeterRow {
    std::uint32_t second = 0;
    int conn = 0;
    std::uint64_t bytes_out = 0;
    std::uint64_t msgs_out = 0;
};

// Host-authoritative transform relay for clients that run their own physics.
// The host streams full transform states; at every send interval the relay
// diffs them against what each entity last went out with, packs the
// significant changes into grouped messages, and fans them out to all
// subscribers. Subscriber-originated updates are dropped and audited.
class RelayHost {
public:
    using SendFn = std::function<void(int conn, std::vector<std::uint8_t> datagram)>;

    RelayHost(RelayConfig cfg, SendFn send) : cfg_(cfg), send_(std::move(send)) {}

    int add_connection(bool is_host);
    void remove_connection(int conn);
    void on_datagram(int conn, std::span<const std::uint8_t> datagram, double now);
    void update(double now);

    // Mean outgoing rate per connection over [now - window, now], KB/s
    // (datagram bytes, envelope headers included).
    std::map<int, double> meter_report(double window, double now) const;
    std::vector<RelayMeterRow> meter_rows() const;

    std::uint64_t rejected_updates() const { return rejected_updates_; }
    std::uint64_t bytes_to(int conn) const;
    std::uint64_t messages_out() const { return messages_out_; }

private:
    void fanout(double at);
    void flush(int conn, wire::Connection& link, double at);

    RelayConfig cfg_;
    SendFn send_;

    struct Conn {
        wire::Connection link;
        bool is_host = false;
    };
    std::map<int, Conn> conns_;
    int next_conn_ = 1;

    std::map<EntityId, wire::TransformRecord> latest_; // newest host state per entity
    std::map<EntityId, Transform> last_forwarded_;
    double next_send_ = 0;
    bool first_update_ = true;
    std::uint32_t fanout_seq_ = 0;

    std::uint64_t rejected_updates_ = 0;
    std::uint64_t messages_out_ = 0;
    std::map<int, std::uint64_t> bytes_per_conn_;
    std::vector<std::pair<double, std::pair<int, std::uint64_t>>> send_log_; // (time, (conn, bytes))
};

} // namespace physlink::server
