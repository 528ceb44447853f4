#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "physlink/wire/bytes.hpp"

namespace physlink::wire {

// Datagram envelope: channel u8 | seq u32 | payload.
// Channel 0 carries fire-and-forget traffic (seq still increments, used for
// staleness checks). Channel 1 carries reliable traffic. Channel 2 is an ack
// whose seq echoes the reliable sequence being acknowledged; it has no payload.
enum class Channel : std::uint8_t {
    Unreliable = 0,
    Reliable = 1,
    Ack = 2,
};

inline constexpr std::size_t kEnvelopeOverhead = 5;

struct Envelope {
    Channel channel = Channel::Unreliable;
    std::uint32_t seq = 0;
    std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_envelope(const Envelope& e);
Envelope decode_envelope(std::span<const std::uint8_t> datagram);

// One endpoint's view of a point-to-point link. Owns sequence numbers in both
// directions, retransmission state for reliable sends, and the dedup/reorder
// buffer for reliable receipt. Time is whatever the caller says it is.
class Connection {
public:
    struct Config {
        double rto_initial = 0.1;
        double rto_max = 1.0;
        std::size_t max_in_flight = 64;
        int max_attempts = 10; // transmissions of a single message before giving up
    };

    Connection() = default;
    explicit Connection(Config cfg) : cfg_(cfg) {}

    // Queues a payload. Unreliable sends go straight to the outbox; reliable
    // sends enter the window (or a pending queue when the window is full).
    void send_unreliable(std::vector<std::uint8_t> payload);
    void send_reliable(std::vector<std::uint8_t> payload, double now);

    // Processes one incoming datagram. Reliable payloads come out of poll()
    // exactly once, in send order; unreliable payloads come out in arrival
    // order. Acks are consumed internally.
    void on_datagram(std::span<const std::uint8_t> datagram, double now);

    // Retransmits anything whose timer expired and promotes pending sends
    // into freed window slots.
    void update(double now);

    // Drains encoded datagrams queued since the last call.
    std::vector<std::vector<std::uint8_t>> out();

    // Drains application payloads ready for delivery.
    std::vector<std::vector<std::uint8_t>> poll();

    bool dead() const { return dead_; }
    std::size_t in_flight() const { return in_flight_.size(); }
    std::size_t pending() const { return pending_.size(); }

    // Running totals of encoded datagram bytes, retransmissions included.
    std::uint64_t bytes_sent() const { return bytes_sent_; }
    std::uint64_t bytes_received() const { return bytes_received_; }

private:
    struct InFlight {
        std::vector<std::uint8_t> payload;
        double next_resend = 0;
        double rto = 0.1;
        int attempts = 0;
        bool sent_once = false;
    };

    void transmit(std::uint32_t seq, InFlight& f, double now);
    void fill_window(double now);

    Config cfg_{};
    bool dead_ = false;

    std::uint32_t next_unreliable_seq_ = 0;
    std::uint32_t next_reliable_seq_ = 0;
    std::map<std::uint32_t, InFlight> in_flight_;
    std::deque<std::vector<std::uint8_t>> pending_;

    std::uint32_t expected_seq_ = 0;
    std::map<std::uint32_t, std::vector<std::uint8_t>> stash_;

    std::vector<std::vector<std::uint8_t>> outbox_;
    std::vector<std::vector<std::uint8_t>> delivered_;
    std::uint64_t bytes_sent_ = 0;
    std::uint64_t bytes_received_ = 0;
};

} // namespace physlink::wire
