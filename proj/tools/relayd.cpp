#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "physlink/server/relay.hpp"
#include "physlink/transport/udp.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"relayd: transform relay over UDP; the first peer to send becomes the host"};

    std::uint16_t port = 7788;
    std::string metrics_path;
    double max_seconds = 0;
    physlink::server::RelayConfig cfg;

    app.add_option("--port", port, "UDP port to listen on");
    app.add_option("--send-rate", cfg.send_rate, "fanout rate, Hz");
    app.add_option("--pos-eps", cfg.pos_eps, "position significance threshold, m");
    app.add_option("--rot-eps", cfg.rot_eps, "rotation significance threshold, rad");
    app.add_option("--max-payload", cfg.max_payload, "grouped message payload cap, bytes");
    app.add_option("--metrics", metrics_path, "write per-second per-connection CSV here on exit");
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

    physlink::server::RelayHost relay(cfg, [&](int conn, std::vector<std::uint8_t> dg) {
        auto it = addr_of.find(conn);
        if (it != addr_of.end()) sock.send_to(it->second, dg);
    });

    std::printf("relayd listening on :%u (rate=%.0fHz)\n", port, cfg.send_rate);

    const auto start = std::chrono::steady_clock::now();
    double next_status = 5.0;
    while (!g_stop) {
        const double now = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        while (auto r = sock.receive()) {
            int conn;
            auto it = conn_of.find(r->from);
            if (it == conn_of.end()) {
                const bool is_host = conn_of.empty();
                conn = relay.add_connection(is_host);
                conn_of[r->from] = conn;
                addr_of[conn] = r->from;
                std::printf("conn %d from %s%s\n", conn, r->from.to_string().c_str(),
                            is_host ? " (host)" : "");
            } else {
                conn = it->second;
            }
            relay.on_datagram(conn, r->payload, now);
        }
        relay.update(now);

        if (now >= next_status) {
            next_status += 5.0;
            std::printf("t=%.0fs conns=%zu msgs=%llu rejected=%llu\n", now, conn_of.size(),
                        static_cast<unsigned long long>(relay.messages_out()),
                        static_cast<unsigned long long>(relay.rejected_updates()));
            std::fflush(stdout);
        }
        if (max_seconds > 0 && now >= max_seconds) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }

    if (!metrics_path.empty()) {
        std::ofstream csv(metrics_path);
        csv << "second,conn,bytes_out,msgs_out\n";
        for (const auto& row : relay.meter_rows())
            csv << row.second << ',' << row.conn << ',' << row.bytes_out << ',' << row.msgs_out << '\n';
        std::printf("wrote %zu meter rows to %s\n", relay.meter_rows().size(), metrics_path.c_str());
    }
    return 0;
}
