#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "physlink/client/ghost.hpp"
#include "physlink/wire/reliable.hpp"

namespace physlink::client {

// Transport glue around a GhostController: a reliability connection to the
// server, payload dispatch, and command encoding. Scene logic and bot
// behavior stay with the caller.
class ClientHost {
public:
    using SendFn = std::function<void(std::vector<std::uint8_t> datagram)>;

    ClientHost(GhostConfig cfg, SendFn send) : ghost_(cfg), send_(std::move(send)) {}

    // First client: dissect the scene and submit it, then ask to join.
    void start_session(LocalScene& scene, double now);
    // Later clients just join.
    void join(double now);

    void on_datagram(std::span<const std::uint8_t> datagram, double now);
    void update(double now);

    void send_commands(std::span<const OutCommand> commands, double now);

    GhostController& ghost() { return ghost_; }
    const GhostController& ghost() const { return ghost_; }
    wire::Connection& connection() { return conn_; }

    std::uint64_t bytes_in() const { return bytes_in_; }
    std::uint64_t updates_received() const { return updates_received_; }
    std::uint32_t last_update_tick() const { return last_update_tick_; }

private:
    void dispatch(std::span<const std::uint8_t> payload, double now);
    void flush();

    GhostController ghost_;
    SendFn send_;
    wire::Connection conn_;
    std::uint64_t bytes_in_ = 0;
    std::uint64_t updates_received_ = 0;
    std::uint32_t last_update_tick_ = 0;
};

} // namespace physlink::client
