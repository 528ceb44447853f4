#pragma once

#include <cstdint>
#include <vector>

#include "physlink/transport/sim_network.hpp"

// Scenario harness: wires a server, bot clients, and the simulated network
// into reproducible experiments over virtual time. Reports carry fixed
// reference columns next to the measured figures so drift stays visible.

namespace physlink::bench {

// Fixed reference columns. Values are pinned; measurements are compared for
// trend and order of magnitude, not equality. Off-table sizes return 0.
double reference_throughput_mbit(int objects);      // 500..10000 rigid bodies
double reference_softbody_mbit(int particles);      // 500 and 1500 particles
double reference_relay_kb(int objects);             // 32..512, this design
double reference_relay_alt_kb(int objects);         // 32..512, commercial relay

struct MultiObjectConfig {
    int objects = 2000;
    double duration = 6.0;       // simulated seconds
    double measure_from = 0.5;   // bandwidth window, all objects still falling
    double measure_to = 2.5;
    std::uint64_t seed = 1;
    transport::SimulatedNetwork::LinkParams link{};
};

struct MultiObjectReport {
    int objects = 0;
    double mean_step_ms = 0;     // wall clock around the physics tick
    double max_step_ms = 0;
    double outbound_mbit_s = 0;  // server to the measuring client, window mean
    double client_bytes_s = 0;   // delivered datagram bytes at the client
    double updates_s = 0;        // grouped datagrams per second at the client
    std::uint64_t records_sent = 0;
    std::uint64_t unknown_records = 0;
    double reference_mbit_s = 0;
};

MultiObjectReport run_multiobject(const MultiObjectConfig& cfg);

struct SoftbodyConfig {
    int particles = 500;         // target; the build lands within 10%
    double duration = 12.0;
    bool poke = true;            // scripted hand press into the shell
    std::uint64_t seed = 1;
};

struct SoftbodyReport {
    int particles = 0;           // actual particle count after clustering
    int springs = 0;
    double mean_step_ms = 0;
    double max_step_ms = 0;
    double particle_stream_mbit_s = 0; // measured at the client
    double model_mbit_s = 0;           // send rate x particles x 12 B
    double reference_mbit_s = 0;
    bool energy_monotone_after_settle = false;
    double settled_energy = 0;
};

SoftbodyReport run_softbody(const SoftbodyConfig& cfg);

struct CcuConfig {
    int users = 100;
    double join_interval = 1.0;  // one join per second
    double steady_duration = 60.0;
    double bot_frame = 0.02;     // command cadence per bot
    double walk_speed = 1.0;     // m/s
    double waypoint_refresh = 1.0;
    int measured_clients = 6;    // full-decode clients; the rest ack and count
    std::uint64_t seed = 1;
    transport::SimulatedNetwork::LinkParams link{0.02, 0.0, 0.0};
};

struct CcuReport {
    int users = 0;
    std::vector<double> outbound_kb_s;  // one sample per simulated second
    double join_end = 0;                // when the last user joined
    bool curve_monotone_during_joins = false;
    double steady_mean_kb_s = 0;
    double steady_band = 0;             // max |sample - mean| / mean, steady phase
    double max_divergence_m = 0;        // client render pose vs server pose
    double divergence_bound_m = 0;      // speed x (latency + 2 intervals + frame)
    std::uint64_t unknown_records = 0;
    int physics_objects = 0;            // M: replicated physics entities
    int capacity_users = 0;             // N = M / 4
};

CcuReport run_ccu(const CcuConfig& cfg);

struct RelayRunConfig {
    int objects = 512;
    int subscribers = 4;
    double duration = 10.0;
    double host_rate = 50.0;     // host full-state stream, Hz
    float send_rate = 12.0f;     // relay fanout, Hz
    std::uint64_t seed = 1;
    transport::SimulatedNetwork::LinkParams link{};
};

struct RelayReport {
    int objects = 0;
    double per_subscriber_kb_s = 0;     // datagram bytes, KB = 1000 B
    double grouping_savings = 0;        // vs one datagram per record
    double max_staleness_intervals = 0; // worst subscriber state age seen
    std::uint64_t rejected_updates = 0;
    double reference_kb_s = 0;
    double reference_alt_kb_s = 0;
};

RelayReport run_relay(const RelayRunConfig& cfg);

struct LatencyConfig {
    double render_a = 0.011; // observer frame cost, s
    double render_b = 0.011; // actor frame cost, s
    double net_a = 0.010;    // server -> observer, one way
    double net_b = 0.010;    // actor -> server, one way
    double phys = 0.005;     // physics step cost
    int trials = 96;
    std::uint64_t seed = 1;
};

struct LatencyBreakdown {
    double render_a = 0, render_b = 0, net_a = 0, net_b = 0, phys = 0, interval = 0;
    double total() const { return render_a + render_b + net_a + net_b + phys + interval; }
};

// The analytic sum; interval is the mean wait for the next critical-rate
// send, half the critical period.
LatencyBreakdown analytic_breakdown(const LatencyConfig& cfg);

struct LatencyReport {
    LatencyBreakdown analytic;
    double measured_total_s = 0; // mean command-to-observation time over trials
    int trials = 0;
};

LatencyReport run_latency(const LatencyConfig& cfg);

} // namespace physlink::bench
