#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "physlink/server/server_host.hpp"
#include "physlink/transport/udp.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"physd: headless authoritative physics server over UDP"};

    std::uint16_t port = 7777;
    std::string metrics_path;
    double max_seconds = 0;
    physlink::server::ServerHost::Config cfg;

    app.add_option("--port", port, "UDP port to listen on");
    app.add_option("--dt", cfg.session.world.dt, "physics tick length, seconds");
    app.add_option("--default-rate", cfg.session.default_rate, "baseline per-entity send rate, Hz");
    app.add_option("--critical-rate", cfg.session.critical_rate, "send rate for interacted entities, Hz");
    app.add_option("--pos-eps", cfg.session.pos_eps, "position significance threshold, m");
    app.add_option("--rot-eps", cfg.session.rot_eps, "rotation significance threshold, rad");
    app.add_option("--max-payload", cfg.max_payload, "grouped message payload cap, bytes");
    app.add_option("--metrics", metrics_path, "write per-tick metrics CSV here on exit");
    app.add_option("--max-seconds", max_seconds, "exit after this much wall time (0 = run until SIGINT)");
    CLI11_PARSE(app, argc, argv);

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    physlink::transport::UdpSocket sock;
    try {
        sock.bind(port);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "bind failed: %s\n", e.what());
        return 1;
    }

    std::map<physlink::transport::UdpSocket::Address, int> conn_of;
    std::map<int, physlink::transport::UdpSocket::Address> addr_of;

    physlink::server::ServerHost host(cfg, [&](int conn, std::vector<std::uint8_t> dg) {
        auto it = addr_of.find(conn);
        if (it != addr_of.end()) sock.send_to(it->second, dg);
    });

    std::printf("physd listening on :%u (dt=%.3fs rates=%.0f/%.0fHz)\n", port,
                cfg.session.world.dt, cfg.session.default_rate, cfg.session.critical_rate);

    const auto start = std::chrono::steady_clock::now();
    double next_status = 5.0;
    while (!g_stop) {
        const double now = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        while (auto r = sock.receive()) {
            int conn;
            auto it = conn_of.find(r->from);
            if (it == conn_of.end()) {
                conn = host.add_connection();
                conn_of[r->from] = conn;
                addr_of[conn] = r->from;
                std::printf("conn %d from %s\n", conn, r->from.to_string().c_str());
            } else {
                conn = it->second;
            }
            host.on_datagram(conn, r->payload, now);
        }
        host.update(now);

        if (now >= next_status) {
            next_status += 5.0;
            std::printf("t=%.0fs tick=%u entities=%zu conns=%zu out=%llu B\n", now,
                        host.session().world().tick(), host.session().world().entity_count(),
                        conn_of.size(), static_cast<unsigned long long>(host.bytes_out()));
            std::fflush(stdout);
        }
        if (max_seconds > 0 && now >= max_seconds) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }

    if (!metrics_path.empty()) {
        std::ofstream csv(metrics_path);
        csv << "tick,step_ms,entities,records_sent,bytes_out,events_out\n";
        for (const auto& m : host.metrics())
            csv << m.tick << ',' << m.step_ms << ',' << m.entities << ',' << m.records_sent << ','
                << m.bytes_out << ',' << m.events_out << '\n';
        std::printf("wrote %zu metric rows to %s\n", host.metrics().size(), metrics_path.c_str());
    }
    if (host.protocol_errors() > 0)
        std::printf("protocol errors: %llu\n", static_cast<unsigned long long>(host.protocol_errors()));
    return 0;
}
